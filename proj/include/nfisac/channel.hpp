#ifndef NFISAC_CHANNEL_HPP
#define NFISAC_CHANNEL_HPP

#include <vector>

#include "nfisac/geometry.hpp"
#include "nfisac/numkernel.hpp"
#include "nfisac/rng.hpp"

// Multipath downlink channels. Each user has a line-of-sight path plus P
// scattered paths; the near-field model builds every path from the exact
// spherical-wave focusing vector, the far-field model from plane-wave
// steering at the same angles. The far model is the design-side
// approximation; physical truth in this codebase is always the near model.

namespace nfisac {

struct UserPlacement {
    PolarCoord los;
    cdouble los_gain{0.0, 0.0};
    std::vector<PolarCoord> scatterers;
    std::vector<cdouble> scatter_gains;

    int paths() const { return static_cast<int>(scatterers.size()); }
};

enum class ChannelModel { kNear, kFar };

struct ChannelMatrix {
    CMatrix rows;  // K x N, row k = h_k^H
    ChannelModel model = ChannelModel::kNear;

    int users() const { return static_cast<int>(rows.rows()); }
    CVector user(int k) const { return rows.row(k).adjoint(); }  // h_k as column
};

// Draws path gains for a placement: line of sight
// alpha_0 = lambda/(4 pi r_0) * exp(j phi), phi uniform; each scattered path
// a circularly symmetric Gaussian with per-component deviation 0.1 |alpha_0|.
void sample_gains(UserPlacement& user, double wavelength, Rng& rng);

// h = alpha_0 a(p_0) + sqrt(1/P) sum_l alpha_l a(p_l); the scatter sum is
// skipped when there are no scattered paths.
CVector near_channel(const ArrayConfig& cfg, const UserPlacement& user);
CVector far_channel(const ArrayConfig& cfg, const UserPlacement& user);

ChannelMatrix assemble_channel(const ArrayConfig& cfg,
                               const std::vector<UserPlacement>& users,
                               ChannelModel model);

// SINR of user k under precoder F (columns f_i):
// |h_k^H f_k|^2 / (sum_{i != k} |h_k^H f_i|^2 + noise_power).
double user_sinr(const ChannelMatrix& truth, const CMatrix& precoder, int k,
                 double noise_power);

// Same ratio expressed through per-user covariance blocks F_i (PSD):
// tr(h_k h_k^H F_k) / (sum_{i != k} tr(h_k h_k^H F_i) + noise_power).
double user_sinr_cov(const CVector& h_k, const std::vector<CMatrix>& blocks, int k,
                     double noise_power);

// Sum over users of log2(1 + SINR_k). `truth` should be the near-field
// channel regardless of which model designed the precoder.
double sum_rate(const ChannelMatrix& truth, const CMatrix& precoder,
                double noise_power);

}  // namespace nfisac

#endif
