#include "nfisac/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nfisac {

void sample_gains(UserPlacement& user, double wavelength, Rng& rng) {
    if (!(wavelength > 0.0))
        throw std::invalid_argument("sample_gains: wavelength must be positive");
    const double mag = wavelength / (4.0 * std::numbers::pi * user.los.range);
    user.los_gain = mag * rng.unit_phase();
    user.scatter_gains.resize(user.scatterers.size());
    for (auto& g : user.scatter_gains)
        g = rng.cnormal(0.1 * mag);
}

namespace {

CVector build_channel(const ArrayConfig& cfg, const UserPlacement& user, ChannelModel model) {
    if (user.scatter_gains.size() != user.scatterers.size())
        throw std::invalid_argument("channel: scatterer gain/position count mismatch");
    auto path = [&](const PolarCoord& p) {
        return model == ChannelModel::kNear ? near_focusing(cfg, p)
                                            : far_steering(cfg, p.angle);
    };
    CVector h = user.los_gain * path(user.los);
    const int p = user.paths();
    if (p > 0) {
        const double w = std::sqrt(1.0 / p);
        for (int l = 0; l < p; ++l)
            h += w * user.scatter_gains[l] * path(user.scatterers[l]);
    }
    return h;
}

}  // namespace

CVector near_channel(const ArrayConfig& cfg, const UserPlacement& user) {
    return build_channel(cfg, user, ChannelModel::kNear);
}

CVector far_channel(const ArrayConfig& cfg, const UserPlacement& user) {
    return build_channel(cfg, user, ChannelModel::kFar);
}

ChannelMatrix assemble_channel(const ArrayConfig& cfg,
                               const std::vector<UserPlacement>& users,
                               ChannelModel model) {
    if (users.empty())
        throw std::invalid_argument("assemble_channel: no users");
    ChannelMatrix out;
    out.model = model;
    out.rows.resize(static_cast<Eigen::Index>(users.size()), cfg.n_elements);
    for (size_t k = 0; k < users.size(); ++k)
        out.rows.row(static_cast<Eigen::Index>(k)) =
            build_channel(cfg, users[k], model).adjoint();
    return out;
}

double user_sinr(const ChannelMatrix& truth, const CMatrix& precoder, int k,
                 double noise_power) {
    if (k < 0 || k >= truth.users())
        throw std::invalid_argument("user_sinr: user index out of range");
    if (truth.rows.cols() != precoder.rows())
        throw std::invalid_argument("user_sinr: channel/precoder dimension mismatch");
    if (!(noise_power > 0.0))
        throw std::invalid_argument("user_sinr: noise power must be positive");
    const Eigen::RowVectorXcd projected = truth.rows.row(k) * precoder;
    double interference = 0.0;
    for (Eigen::Index i = 0; i < projected.size(); ++i)
        if (i != k) interference += std::norm(projected(i));
    return std::norm(projected(k)) / (interference + noise_power);
}

double user_sinr_cov(const CVector& h_k, const std::vector<CMatrix>& blocks, int k,
                     double noise_power) {
    if (k < 0 || k >= static_cast<int>(blocks.size()))
        throw std::invalid_argument("user_sinr_cov: user index out of range");
    if (!(noise_power > 0.0))
        throw std::invalid_argument("user_sinr_cov: noise power must be positive");
    double signal = 0.0, interference = 0.0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        const double q = std::real((h_k.adjoint() * blocks[i] * h_k)(0, 0));
        if (static_cast<int>(i) == k)
            signal = q;
        else
            interference += q;
    }
    return signal / (interference + noise_power);
}

double sum_rate(const ChannelMatrix& truth, const CMatrix& precoder, double noise_power) {
    double rate = 0.0;
    for (int k = 0; k < truth.users(); ++k)
        rate += std::log2(1.0 + user_sinr(truth, precoder, k, noise_power));
    return rate;
}

}  // namespace nfisac
