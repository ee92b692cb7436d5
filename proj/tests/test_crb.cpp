#include "doctest.h"

#include <cmath>
#include <complex>

#include "nfisac/beamform.hpp"
#include "nfisac/crb.hpp"

using namespace nfisac;

namespace {

const ArrayConfig kTx(4, 0.005, 0.01);
const ArrayConfig kRx(4, 0.005, 0.01);

TargetTruth make_truth(double r, double theta, cdouble beta = {0.6, -0.3}) {
    return TargetTruth::from_tx(beta, PolarCoord(r, theta), kTx, kRx);
}

CMatrix radar_cov(const TargetTruth& truth, double p_t) {
    const Precoder f = radar_precoder(kTx, truth.tx, p_t, ChannelModel::kNear);
    return f.entries * f.entries.adjoint();
}

// Per-snapshot information assembled without the trace algebra: stack the
// four real parameters' response derivatives as columns of D with
// vec(beta Gd_r X), vec(beta Gd_theta X), vec(G X), vec(j G X) and evaluate
// J = (2 / sigma^2) Re(D^H D). With X = F S and S S^H = L I this must land
// on the same numbers as the closed form.
RMatrix brute_force_fim(const CMatrix& g, const GDerivatives& dg, const CMatrix& x,
                        cdouble beta, double noise_power) {
    const auto vecm = [](const CMatrix& m) {
        return CVector(Eigen::Map<const CVector>(m.data(), m.size()));
    };
    CMatrix d(g.rows() * x.cols(), 4);
    d.col(0) = vecm(beta * dg.d_range * x);
    d.col(1) = vecm(beta * dg.d_angle * x);
    d.col(2) = vecm(g * x);
    d.col(3) = vecm(cdouble(0.0, 1.0) * g * x);
    return (2.0 / noise_power) * (d.adjoint() * d).real();
}

}  // namespace

TEST_CASE("response matrix is the receive-transmit dyad") {
    const TargetTruth truth = make_truth(2.0, 0.4);
    const CMatrix g = g_matrix(truth, kTx, kRx);
    const CVector b = rx_focusing(kRx, truth.rx);
    const CVector a = near_focusing(kTx, truth.tx);
    CHECK((g - b * a.adjoint()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(g.rows() == 4);
    CHECK(g.cols() == 4);
}

TEST_CASE("closed-form response derivatives match central differences") {
    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
        const double r = rng.uniform(1.0, 10.0);
        const double theta = rng.uniform(-1.2, 1.2);
        const TargetTruth truth = make_truth(r, theta);
        const GDerivatives an = g_derivatives(truth, kTx, kRx, DerivMode::kAnalytic);
        const GDerivatives fd = g_derivatives(truth, kTx, kRx, DerivMode::kFiniteDifference);
        const double scale_r = an.d_range.cwiseAbs().maxCoeff();
        const double scale_a = an.d_angle.cwiseAbs().maxCoeff();
        CHECK((an.d_range - fd.d_range).cwiseAbs().maxCoeff() <= 1e-5 * scale_r);
        CHECK((an.d_angle - fd.d_angle).cwiseAbs().maxCoeff() <= 1e-5 * scale_a);
    }
}

TEST_CASE("information blocks match a vectorized per-snapshot assembly") {
    Rng rng(37);
    const TargetTruth truth = make_truth(1.5, -0.5, {0.8, 0.2});
    const CMatrix g = g_matrix(truth, kTx, kRx);
    const GDerivatives dg = g_derivatives(truth, kTx, kRx);

    // Two orthogonal QPSK streams over two snapshots: S S^H = L I exactly.
    const double q = std::sqrt(0.5);
    CMatrix s(2, 2);
    s << cdouble(q, q), cdouble(q, q), cdouble(q, q), cdouble(-q, -q);
    CMatrix f(4, 2);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) f(i, j) = cdouble(rng.normal(), rng.normal());
    f *= std::sqrt(1.0 / f.squaredNorm());

    const int snapshots = 2;
    const double noise = 0.3;
    const CMatrix x = f * s;
    const CMatrix rx_cov = f * f.adjoint();  // X X^H = L R_x for this S

    const FimBlocks blocks = fim_blocks(g, dg, rx_cov, truth.beta, snapshots, noise);
    const RMatrix brute = brute_force_fim(g, dg, x, truth.beta, noise);

    CHECK((blocks.phi_phi - brute.topLeftCorner(2, 2)).cwiseAbs().maxCoeff() <=
          1e-10 * brute.topLeftCorner(2, 2).cwiseAbs().maxCoeff());
    CHECK((blocks.phi_beta - brute.topRightCorner(2, 2)).cwiseAbs().maxCoeff() <=
          1e-10 * brute.cwiseAbs().maxCoeff());
    CHECK((blocks.beta_beta - brute.bottomRightCorner(2, 2)).cwiseAbs().maxCoeff() <=
          1e-10 * brute.bottomRightCorner(2, 2).cwiseAbs().maxCoeff());
}

TEST_CASE("schur-complement and explicit trace bounds coincide") {
    Rng rng(41);
    for (int t = 0; t < 25; ++t) {
        const TargetTruth truth =
            make_truth(rng.uniform(1.0, 8.0), rng.uniform(-1.0, 1.0),
                       cdouble(rng.normal(), rng.normal()) * 0.5);
        if (std::abs(truth.beta) < 1e-3) continue;
        const double p_t = 1.0;
        const CMatrix rx_cov = radar_cov(truth, p_t);
        const CMatrix g = g_matrix(truth, kTx, kRx);
        const GDerivatives dg = g_derivatives(truth, kTx, kRx);
        const int snapshots = 16;
        const double noise = 0.05;

        const FimBlocks blocks = fim_blocks(g, dg, rx_cov, truth.beta, snapshots, noise);
        const CrbReport schur = crb_matrix(blocks, truth.beta, snapshots, noise, p_t);
        const CrbReport expl =
            crb_matrix_explicit(g, dg, rx_cov, truth.beta, snapshots, noise);

        REQUIRE_FALSE(schur.infinite);
        REQUIRE_FALSE(expl.infinite);
        const double scale = schur.matrix.cwiseAbs().maxCoeff();
        CHECK((schur.matrix - expl.matrix).cwiseAbs().maxCoeff() <= 1e-8 * scale);
        CHECK(schur.crb_range == doctest::Approx(expl.crb_range).epsilon(1e-8));
        CHECK(schur.crb_angle == doctest::Approx(expl.crb_angle).epsilon(1e-8));
        CHECK(schur.rcrb_range == doctest::Approx(std::sqrt(schur.crb_range)).epsilon(1e-12));
        CHECK(schur.rcrb_angle == doctest::Approx(std::sqrt(schur.crb_angle)).epsilon(1e-12));
    }
}

TEST_CASE("bound scales inversely with the snapshot count") {
    const TargetTruth truth = make_truth(3.0, 0.3);
    const CMatrix rx_cov = radar_cov(truth, 2.0);
    const CMatrix g = g_matrix(truth, kTx, kRx);
    const GDerivatives dg = g_derivatives(truth, kTx, kRx);
    const double noise = 0.1;

    const FimBlocks b1 = fim_blocks(g, dg, rx_cov, truth.beta, 32, noise);
    const FimBlocks b2 = fim_blocks(g, dg, rx_cov, truth.beta, 64, noise);
    const CrbReport r1 = crb_matrix(b1, truth.beta, 32, noise, 2.0);
    const CrbReport r2 = crb_matrix(b2, truth.beta, 64, noise, 2.0);
    // Every information entry is linear in L, so the bound halves exactly.
    CHECK((r2.matrix - 0.5 * r1.matrix).cwiseAbs().maxCoeff() <=
          1e-12 * r1.matrix.cwiseAbs().maxCoeff());
    CHECK(r2.snr_r == doctest::Approx(2.0 * r1.snr_r).epsilon(1e-14));
}

TEST_CASE("known-coordinate bounds reduce the full information matrix") {
    Rng rng(43);
    for (int t = 0; t < 10; ++t) {
        const TargetTruth truth =
            make_truth(rng.uniform(1.5, 6.0), rng.uniform(-0.9, 0.9));
        const CMatrix rx_cov = radar_cov(truth, 1.0);
        const CMatrix g = g_matrix(truth, kTx, kRx);
        const GDerivatives dg = g_derivatives(truth, kTx, kRx);
        const int snapshots = 8;
        const double noise = 0.2;

        const FimBlocks blocks = fim_blocks(g, dg, rx_cov, truth.beta, snapshots, noise);

        // Drop one coordinate from the stacked 4x4 information matrix and
        // Schur-eliminate the nuisance pair by hand.
        RMatrix full(4, 4);
        full.topLeftCorner(2, 2) = blocks.phi_phi;
        full.topRightCorner(2, 2) = blocks.phi_beta;
        full.bottomLeftCorner(2, 2) = blocks.phi_beta.transpose();
        full.bottomRightCorner(2, 2) = blocks.beta_beta;
        const auto reduced = [&](int keep) {
            RMatrix j(3, 3);
            j(0, 0) = full(keep, keep);
            j.block(0, 1, 1, 2) = full.block(keep, 2, 1, 2);
            j.block(1, 0, 2, 1) = full.block(2, keep, 2, 1);
            j.bottomRightCorner(2, 2) = full.bottomRightCorner(2, 2);
            const double schur =
                j(0, 0) -
                (j.block(0, 1, 1, 2) * j.bottomRightCorner(2, 2).inverse() *
                 j.block(1, 0, 2, 1))(0, 0);
            return 1.0 / schur;
        };

        const double want_r = reduced(0);
        const double want_a = reduced(1);
        const double got_r =
            crb_range_known_angle(g, dg, rx_cov, truth.beta, snapshots, noise);
        const double got_a =
            crb_angle_known_range(g, dg, rx_cov, truth.beta, snapshots, noise);
        CHECK(got_r == doctest::Approx(want_r).epsilon(1e-10));
        CHECK(got_a == doctest::Approx(want_a).epsilon(1e-10));
    }
}

TEST_CASE("sensing snr follows its defining ratio") {
    CHECK(snr_r({0.5, 0.0}, 64, 2.0, 0.25) ==
          doctest::Approx(0.25 * 64 * 2.0 / 0.25).epsilon(1e-14));
    CHECK(snr_r({0.0, 1.0}, 1, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("singular information is flagged rather than inverted") {
    const TargetTruth truth = make_truth(2.0, 0.1, {0.0, 0.0});
    const CMatrix rx_cov = radar_cov(truth, 1.0);
    const CMatrix g = g_matrix(truth, kTx, kRx);
    const GDerivatives dg = g_derivatives(truth, kTx, kRx);
    // A vanished reflection carries no location information at all.
    const FimBlocks blocks = fim_blocks(g, dg, rx_cov, truth.beta, 8, 0.1);
    const CrbReport rep = crb_matrix(blocks, truth.beta, 8, 0.1, 1.0);
    CHECK(rep.infinite);
}
