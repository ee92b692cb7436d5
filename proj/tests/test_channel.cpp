#include "doctest.h"

#include <cmath>
#include <complex>

#include "nfisac/channel.hpp"

using namespace nfisac;

namespace {

UserPlacement los_only(double r, double theta) {
    UserPlacement u;
    u.los = PolarCoord(r, theta);
    u.los_gain = cdouble(1.0, 0.0);
    return u;
}

}  // namespace

TEST_CASE("sampled gains follow the free-space line-of-sight magnitude") {
    UserPlacement u = los_only(5.0, 0.2);
    u.scatterers = {PolarCoord(3.0, -0.1), PolarCoord(7.0, 0.4)};
    Rng rng = Rng::stream(42, stream_tag("gains"));
    sample_gains(u, 0.01, rng);

    CHECK(std::abs(u.los_gain) == doctest::Approx(0.01 / (4 * M_PI * 5.0)).epsilon(1e-12));
    REQUIRE(u.scatter_gains.size() == 2);
    // Scattered paths are Gaussian around a tenth of the direct magnitude;
    // their exact values only need to be reproducible.
    Rng again = Rng::stream(42, stream_tag("gains"));
    UserPlacement v = los_only(5.0, 0.2);
    v.scatterers = u.scatterers;
    sample_gains(v, 0.01, again);
    CHECK(v.los_gain == u.los_gain);
    CHECK(v.scatter_gains[0] == u.scatter_gains[0]);
    CHECK(v.scatter_gains[1] == u.scatter_gains[1]);
}

TEST_CASE("line-of-sight channel is the scaled focusing vector") {
    ArrayConfig cfg(16, 0.005, 0.01);
    UserPlacement u = los_only(4.0, 0.3);
    u.los_gain = cdouble(0.25, -0.5);
    const CVector h = near_channel(cfg, u);
    const CVector want = u.los_gain * near_focusing(cfg, u.los);
    CHECK((h - want).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("multipath channel adds normalized scattered paths") {
    ArrayConfig cfg(16, 0.005, 0.01);
    UserPlacement u = los_only(4.0, 0.3);
    u.los_gain = cdouble(0.2, 0.1);
    u.scatterers = {PolarCoord(2.0, -0.4), PolarCoord(9.0, 0.8)};
    u.scatter_gains = {cdouble(0.01, 0.02), cdouble(-0.03, 0.005)};

    CVector want = u.los_gain * near_focusing(cfg, u.los);
    const double norm = std::sqrt(1.0 / 2.0);
    want += norm * u.scatter_gains[0] * near_focusing(cfg, u.scatterers[0]);
    want += norm * u.scatter_gains[1] * near_focusing(cfg, u.scatterers[1]);
    CHECK((near_channel(cfg, u) - want).cwiseAbs().maxCoeff() <= 1e-15);

    // The far model swaps every spherical response for a planar one at the
    // same angle; range affects it only through the gains.
    CVector want_far = u.los_gain * far_steering(cfg, u.los.angle);
    want_far += norm * u.scatter_gains[0] * far_steering(cfg, u.scatterers[0].angle);
    want_far += norm * u.scatter_gains[1] * far_steering(cfg, u.scatterers[1].angle);
    CHECK((far_channel(cfg, u) - want_far).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("channel matrix rows are conjugated user channels") {
    ArrayConfig cfg(8, 0.005, 0.01);
    std::vector<UserPlacement> users{los_only(3.0, 0.0), los_only(10.0, 0.7)};
    users[0].los_gain = cdouble(0.5, 0.5);
    users[1].los_gain = cdouble(0.0, -1.0);

    const ChannelMatrix m = assemble_channel(cfg, users, ChannelModel::kNear);
    CHECK(m.users() == 2);
    CHECK(m.model == ChannelModel::kNear);
    for (int k = 0; k < 2; ++k) {
        const CVector h = near_channel(cfg, users[k]);
        CHECK((m.rows.row(k).adjoint() - h).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((m.user(k) - h).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("sinr and sum rate agree with hand-computed values") {
    // Orthogonal two-user system: no interference, SINR is pure SNR.
    ChannelMatrix truth;
    truth.rows = CMatrix::Zero(2, 2);
    truth.rows(0, 0) = cdouble(1.0, 0.0);
    truth.rows(1, 1) = cdouble(1.0, 0.0);

    CMatrix f = CMatrix::Zero(2, 2);
    f(0, 0) = std::sqrt(2.0);
    f(1, 1) = std::sqrt(3.0);

    CHECK(user_sinr(truth, f, 0, 0.5) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(user_sinr(truth, f, 1, 0.5) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(sum_rate(truth, f, 0.5) ==
          doctest::Approx(std::log2(5.0) + std::log2(7.0)).epsilon(1e-12));

    // Cross-coupled precoder: user 0 receives stream 1 as interference.
    CMatrix g(2, 2);
    g << cdouble(1, 0), cdouble(0.5, 0), cdouble(0, 0), cdouble(1, 0);
    // |h_0^H g_0|^2 = 1, interference |h_0^H g_1|^2 = 0.25.
    CHECK(user_sinr(truth, g, 0, 0.5) == doctest::Approx(1.0 / 0.75).epsilon(1e-12));
}

TEST_CASE("covariance-block sinr matches the rank-one case") {
    ArrayConfig cfg(8, 0.005, 0.01);
    std::vector<UserPlacement> users{los_only(3.0, 0.1), los_only(6.0, -0.5)};
    users[0].los_gain = cdouble(0.3, -0.2);
    users[1].los_gain = cdouble(-0.1, 0.6);
    const ChannelMatrix m = assemble_channel(cfg, users, ChannelModel::kNear);

    CMatrix f(8, 2);
    Rng rng(5);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 2; ++j) f(i, j) = rng.cnormal(1.0);

    std::vector<CMatrix> blocks{f.col(0) * f.col(0).adjoint(), f.col(1) * f.col(1).adjoint()};
    for (int k = 0; k < 2; ++k) {
        CHECK(user_sinr_cov(m.user(k), blocks, k, 1e-3) ==
              doctest::Approx(user_sinr(m, f, k, 1e-3)).epsilon(1e-10));
    }
}

TEST_CASE("channel assembly validates its inputs") {
    ArrayConfig cfg(8, 0.005, 0.01);
    CHECK_THROWS_AS(assemble_channel(cfg, {}, ChannelModel::kNear), std::invalid_argument);

    UserPlacement mismatched = los_only(3.0, 0.1);
    mismatched.scatterers = {PolarCoord(2.0, 0.0)};
    // One scatterer but no sampled gain for it.
    CHECK_THROWS_AS(near_channel(cfg, mismatched), std::invalid_argument);
}
