#include "doctest.h"

#include <cmath>
#include <complex>

#include "nfisac/geometry.hpp"
#include "nfisac/powermin.hpp"

using namespace nfisac;

namespace {

const ArrayConfig kCfg(8, 0.005, 0.01);

ChannelMatrix random_rows(int users, int antennas, std::uint64_t seed) {
    Rng rng(seed);
    ChannelMatrix cm;
    cm.rows.resize(users, antennas);
    for (int i = 0; i < users; ++i)
        for (int j = 0; j < antennas; ++j) cm.rows(i, j) = rng.cnormal(0.5);
    cm.model = ChannelModel::kNear;
    return cm;
}

std::vector<CMatrix> rank1_blocks(const Precoder& p) {
    std::vector<CMatrix> blocks;
    for (Eigen::Index k = 0; k < p.entries.cols(); ++k) {
        const CVector f = p.entries.col(k);
        blocks.push_back(f * f.adjoint());
    }
    return blocks;
}

}  // namespace

TEST_CASE("reduction basis spans the channels and the target vector") {
    const ChannelMatrix cm = random_rows(2, 8, 51);
    const CVector a = near_focusing(kCfg, PolarCoord(3.0, 0.3));
    const CMatrix q = reduction_basis(cm, a);
    CHECK(q.rows() == 8);
    CHECK(q.cols() == 3);  // independent h_1, h_2, a
    CHECK((q.adjoint() * q - CMatrix::Identity(3, 3)).norm() <= 1e-12);
    for (int k = 0; k < 2; ++k) {
        const CVector h = cm.user(k);
        CHECK((h - q * (q.adjoint() * h)).norm() <= 1e-10 * h.norm());
    }
    CHECK((a - q * (q.adjoint() * a)).norm() <= 1e-10 * a.norm());

    // A repeated channel row must not inflate the dimension.
    ChannelMatrix dup = cm;
    dup.rows.row(1) = dup.rows.row(0);
    CHECK(reduction_basis(dup, a).cols() == 2);
}

TEST_CASE("single user with no beampattern floor hits the matched-filter power") {
    const ChannelMatrix cm = random_rows(1, 8, 53);
    const CVector a = near_focusing(kCfg, PolarCoord(3.0, 0.3));
    QosSpec qos;
    qos.sinr_floors = {7.5};
    qos.beampattern_floor = 0.0;
    qos.noise_power = 0.4;

    Rng rng(1);
    const SdpSolution sol = minimize_power(cm, a, qos, SdpOptions{}, rng);
    REQUIRE(sol.status == SdpStatus::kOptimal);
    const double want = 7.5 * 0.4 / cm.user(0).squaredNorm();
    CHECK(sol.relaxed_power == doctest::Approx(want).epsilon(1e-6));
    REQUIRE(sol.recovered.has_value());
    CHECK(sol.recovered_power == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("beampattern floor alone costs floor over array gain") {
    const ChannelMatrix cm = random_rows(1, 8, 57);
    const CVector a = near_focusing(kCfg, PolarCoord(2.0, -0.2));
    QosSpec qos;
    qos.sinr_floors = {0.0};
    qos.beampattern_floor = 5.0;
    qos.noise_power = 1.0;

    Rng rng(2);
    const SdpSolution sol = minimize_power(cm, a, qos, SdpOptions{}, rng);
    REQUIRE(sol.status == SdpStatus::kOptimal);
    CHECK(sol.relaxed_power == doctest::Approx(5.0 / 8.0).epsilon(1e-6));
}

TEST_CASE("subspace reduction reproduces the full-dimension solution") {
    const ChannelMatrix cm = random_rows(2, 8, 59);
    const CVector a = near_focusing(kCfg, PolarCoord(4.0, 0.5));
    QosSpec qos;
    qos.sinr_floors = {4.0, 6.0};
    qos.beampattern_floor = 10.0;
    qos.noise_power = 0.5;

    SdpOptions full;
    full.reduce = false;
    SdpOptions reduced;
    reduced.reduce = true;

    Rng rng_a(3), rng_b(3);
    const SdpSolution s_full = minimize_power(cm, a, qos, full, rng_a);
    const SdpSolution s_red = minimize_power(cm, a, qos, reduced, rng_b);
    REQUIRE(s_full.status == SdpStatus::kOptimal);
    REQUIRE(s_red.status == SdpStatus::kOptimal);
    CHECK(s_full.relaxed_power ==
          doctest::Approx(s_red.relaxed_power).epsilon(1e-8));
}

TEST_CASE("recovered beamformers satisfy every floor at near-relaxed power") {
    const ChannelMatrix cm = random_rows(2, 8, 61);
    const CVector a = near_focusing(kCfg, PolarCoord(3.5, 0.1));
    QosSpec qos;
    qos.sinr_floors = {10.0, 3.0};
    qos.beampattern_floor = 20.0;
    qos.noise_power = 1.0;

    Rng rng(4);
    const SdpSolution sol = minimize_power(cm, a, qos, SdpOptions{}, rng);
    REQUIRE(sol.status == SdpStatus::kOptimal);
    REQUIRE(sol.recovered.has_value());

    // The relaxation is tight here: every block is numerically rank 1.
    REQUIRE(sol.rank_ratios.size() == 2);
    for (const double r : sol.rank_ratios) CHECK(r <= 1e-6);

    const auto slacks = qos_slacks(cm, a, qos, rank1_blocks(*sol.recovered));
    REQUIRE(slacks.size() == 3);
    for (const double s : slacks) CHECK(s >= -1e-9);

    CHECK(sol.recovered_power >= sol.relaxed_power - 1e-9);
    CHECK(sol.recovered_power <= sol.relaxed_power * (1.0 + 1e-3));

    // Relaxed blocks themselves must satisfy the floors too.
    const auto relaxed_slacks = qos_slacks(cm, a, qos, sol.blocks);
    for (const double s : relaxed_slacks) CHECK(s >= -1e-8);
}

TEST_CASE("constraint names track the active floors in order") {
    QosSpec qos;
    qos.sinr_floors = {2.0, 0.0, 1.0};
    qos.beampattern_floor = 3.0;
    qos.noise_power = 1.0;
    const auto names = qos_names(qos);
    REQUIRE(names.size() == 3);
    CHECK(names[0] == "sinr_floor[user 0]");
    CHECK(names[1] == "sinr_floor[user 2]");
    CHECK(names[2] == "beampattern_floor");

    qos.beampattern_floor = 0.0;
    CHECK(qos_names(qos).size() == 2);
}

TEST_CASE("identical channels with unit floors are reported infeasible") {
    ChannelMatrix cm = random_rows(2, 8, 63);
    cm.rows.row(1) = cm.rows.row(0);
    const CVector a = near_focusing(kCfg, PolarCoord(3.0, 0.0));
    QosSpec qos;
    // Both users demand SINR >= 1 over the same channel: the two floors
    // add to an impossible requirement whatever the blocks are.
    qos.sinr_floors = {1.0, 1.0};
    qos.beampattern_floor = 0.0;
    qos.noise_power = 1.0;

    Rng rng(5);
    const SdpSolution sol = minimize_power(cm, a, qos, SdpOptions{}, rng);
    CHECK(sol.status == SdpStatus::kInfeasible);
    CHECK(sol.infeasible_constraint.find("sinr_floor") != std::string::npos);
}

TEST_CASE("degenerate and invalid requests are handled explicitly") {
    const ChannelMatrix cm = random_rows(2, 8, 65);
    const CVector a = near_focusing(kCfg, PolarCoord(3.0, 0.0));
    Rng rng(6);

    QosSpec free;
    free.sinr_floors = {0.0, 0.0};
    free.beampattern_floor = 0.0;
    free.noise_power = 1.0;
    const SdpSolution sol = minimize_power(cm, a, free, SdpOptions{}, rng);
    CHECK(sol.status == SdpStatus::kOptimal);
    CHECK(sol.relaxed_power == 0.0);
    CHECK(sol.recovered_power == 0.0);

    QosSpec bad = free;
    bad.sinr_floors = {1.0};  // wrong count
    CHECK_THROWS_AS(minimize_power(cm, a, bad, SdpOptions{}, rng), std::invalid_argument);

    QosSpec neg = free;
    neg.sinr_floors = {-1.0, 0.0};
    CHECK_THROWS_AS(minimize_power(cm, a, neg, SdpOptions{}, rng), std::invalid_argument);

    QosSpec no_noise = free;
    no_noise.noise_power = 0.0;
    CHECK_THROWS_AS(minimize_power(cm, a, no_noise, SdpOptions{}, rng),
                    std::invalid_argument);
}
