#ifndef NFISAC_POWERMIN_HPP
#define NFISAC_POWERMIN_HPP

#include <optional>
#include <string>
#include <vector>

#include "nfisac/beamform.hpp"
#include "nfisac/channel.hpp"
#include "nfisac/numkernel.hpp"
#include "nfisac/rng.hpp"

// QoS-constrained transmit power minimization. Per-user covariance blocks
// F_k (PSD, rank relaxed) minimize total power sum_k tr(F_k) subject to
// per-user SINR floors and a beampattern floor at the sensing target:
//
//   tr(h_k h_k^H F_k) >= Gamma_k (sum_{i != k} tr(h_k h_k^H F_i) + sigma_n^2)
//   a^H (sum_k F_k) a >= G_hat,   F_k >= 0.
//
// Every constraint sees the blocks only through {h_1..h_K, a}, so an optimal
// solution lives in that span; the solver works in the reduced subspace
// (dimension <= K+1) and lifts back. The relaxation is solved by a log-det
// barrier interior-point method with a phase-1 feasibility stage; rank-1
// transmit vectors are recovered afterwards by principal components or
// Gaussian randomization with power rescaling.

namespace nfisac {

struct QosSpec {
    std::vector<double> sinr_floors;   // linear Gamma_k >= 0, one per user
    double beampattern_floor = 0.0;    // G_hat >= 0
    double noise_power = 0.0;          // sigma_n^2 > 0
};

struct SdpOptions {
    bool reduce = true;             // solve in span{h_k, a} instead of C^{N_t}
    double barrier_increase = 10.0; // outer multiplier on t
    double gap_tolerance = 1e-10;   // relative duality-measure stop
    int max_newton_steps = 60;
    int randomization_trials = 200;
    double rank1_ratio = 1e-6;      // sigma_2/sigma_1 below which a block is rank 1
};

enum class SdpStatus { kOptimal, kInfeasible };

struct SdpSolution {
    SdpStatus status = SdpStatus::kInfeasible;
    std::string infeasible_constraint;  // narrowest slack when infeasible

    std::vector<CMatrix> blocks;     // lifted N_t x N_t PSD covariances
    double relaxed_power = 0.0;      // sum_k tr(F_k)
    std::vector<double> rank_ratios; // sigma_2/sigma_1 per block

    std::optional<Precoder> recovered;  // rank-1 beamformers, when feasible
    double recovered_power = 0.0;
};

// Solve the relaxation and recover beamformers. `design` provides the K user
// channels (rows h_k^H); `a_target` is the transmit focusing vector at the
// sensing target.
SdpSolution minimize_power(const ChannelMatrix& design, const CVector& a_target,
                           const QosSpec& qos, const SdpOptions& opts, Rng& rng);

// Orthonormal basis (N_t x D) of span{h_1..h_K, a_target}; D is the
// numerical rank.
CMatrix reduction_basis(const ChannelMatrix& design, const CVector& a_target);

// Constraint bookkeeping for tests: slack of each QoS constraint at a given
// set of blocks (nonnegative means satisfied). Order: SINR floors for users
// with Gamma_k > 0, then the beampattern floor if G_hat > 0. `names` gives a
// printable identifier per row.
std::vector<double> qos_slacks(const ChannelMatrix& design, const CVector& a_target,
                               const QosSpec& qos, const std::vector<CMatrix>& blocks);
std::vector<std::string> qos_names(const QosSpec& qos);

}  // namespace nfisac

#endif
