#include "nfisac/beamform.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace nfisac {

namespace {

void check_budget(double p) {
    if (!(p > 0.0) || !std::isfinite(p))
        throw std::invalid_argument("power budget must be positive and finite");
}

Precoder scaled_to_budget(CMatrix f, double budget, const char* what) {
    const double nrm = f.norm();
    if (!(nrm > 0.0))
        throw std::runtime_error(std::string(what) + ": zero precoder, cannot normalize");
    f *= std::sqrt(budget) / nrm;
    return Precoder{std::move(f), budget};
}

}  // namespace

Precoder zf_precoder(const ChannelMatrix& design, double power_budget) {
    check_budget(power_budget);
    require_finite(design.rows, "zf_precoder");
    const CMatrix& h = design.rows;  // K x N_t
    if (h.rows() > h.cols())
        throw std::invalid_argument("zf_precoder: more users than antennas");

    const Eigen::ColPivHouseholderQR<CMatrix> qr(h.adjoint());
    // Relative rank test on the K user rows.
    if (qr.rank() < h.rows()) {
        const auto perm = qr.colsPermutation().indices();
        std::ostringstream msg;
        msg << "zf_precoder: channel rows linearly dependent, offending rows {";
        for (Eigen::Index i = qr.rank(); i < h.rows(); ++i)
            msg << (i > qr.rank() ? "," : "") << perm(i);
        msg << "}";
        throw std::invalid_argument(msg.str());
    }

    const CMatrix gram = h * h.adjoint();
    const CMatrix f = h.adjoint() * gram.ldlt().solve(CMatrix::Identity(h.rows(), h.rows()));
    return scaled_to_budget(f, power_budget, "zf_precoder");
}

Precoder radar_precoder(const ArrayConfig& cfg, const PolarCoord& target,
                        double power_budget, ChannelModel model) {
    check_budget(power_budget);
    // Coupling to a point p is a(p)^H f throughout (echo synthesis, user
    // channels, beampatterns), so the focused beam is proportional to a
    // itself.
    const CVector a = model == ChannelModel::kNear ? near_focusing(cfg, target)
                                                   : far_steering(cfg, target.angle);
    return scaled_to_budget(a, power_budget, "radar_precoder");
}

Eigen::RowVectorXcd opp_aux(const Precoder& radar, const Precoder& comm) {
    if (radar.entries.rows() != comm.entries.rows())
        throw std::invalid_argument("opp_aux: antenna count mismatch");
    // Procrustes target F_rad^H F_com is 1 x N_s; its rank-1 SVD factors
    // cancel to a plain normalization.
    Eigen::RowVectorXcd m = radar.entries.adjoint() * comm.entries;
    const double nrm = m.norm();
    if (nrm == 0.0) {
        Eigen::RowVectorXcd e = Eigen::RowVectorXcd::Zero(comm.entries.cols());
        e(0) = 1.0;
        return e;
    }
    return m / nrm;
}

double tradeoff_objective(const CMatrix& f, const Precoder& comm,
                          const Precoder& radar, const Eigen::RowVectorXcd& aux,
                          double eta) {
    const double comm_term = (f - comm.entries).squaredNorm();
    const double radar_term = (f - radar.entries * aux).squaredNorm();
    return eta * comm_term + (1.0 - eta) * radar_term;
}

namespace {

void check_tradeoff_inputs(const Precoder& comm, const Precoder& radar, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("tradeoff weight must lie in [0, 1]");
    if (comm.entries.rows() != radar.entries.rows())
        throw std::invalid_argument("tradeoff: antenna count mismatch");
    if (radar.entries.cols() != 1)
        throw std::invalid_argument("tradeoff: radar precoder must be a single beam");
    if (std::abs(comm.power_budget - radar.power_budget) >
        1e-9 * std::max(comm.power_budget, radar.power_budget))
        throw std::invalid_argument("tradeoff: power budgets differ");
}

}  // namespace

Precoder tradeoff_ls(const Precoder& comm, const Precoder& radar, double eta) {
    check_tradeoff_inputs(comm, radar, eta);
    if (eta == 1.0) return comm;
    const Eigen::RowVectorXcd aux = opp_aux(radar, comm);
    if (eta == 0.0)
        return Precoder{radar.entries * aux, radar.power_budget};
    const CMatrix blend = eta * comm.entries + (1.0 - eta) * radar.entries * aux;
    return scaled_to_budget(blend, comm.power_budget, "tradeoff_ls");
}

Precoder tradeoff_ls_stacked(const Precoder& comm, const Precoder& radar, double eta) {
    check_tradeoff_inputs(comm, radar, eta);
    if (eta == 1.0) return comm;
    const Eigen::RowVectorXcd aux = opp_aux(radar, comm);
    if (eta == 0.0)
        return Precoder{radar.entries * aux, radar.power_budget};

    const Eigen::Index n = comm.entries.rows();
    const double se = std::sqrt(eta), sc = std::sqrt(1.0 - eta);
    CMatrix a(2 * n, n);
    a << se * CMatrix::Identity(n, n), sc * CMatrix::Identity(n, n);
    CMatrix b(2 * n, comm.entries.cols());
    b << se * comm.entries, sc * (radar.entries * aux);
    const CMatrix blend = pinv(a) * b;
    return scaled_to_budget(blend, comm.power_budget, "tradeoff_ls_stacked");
}

AmResult tradeoff_am(const Precoder& comm, const Precoder& radar, double eta,
                     double epsilon, int max_iterations) {
    check_tradeoff_inputs(comm, radar, eta);
    if (!(epsilon > 0.0))
        throw std::invalid_argument("tradeoff_am: epsilon must be positive");
    if (max_iterations < 1)
        throw std::invalid_argument("tradeoff_am: need at least one iteration");

    const Eigen::Index ns = comm.entries.cols();
    AmResult out;
    out.aux = Eigen::RowVectorXcd::Constant(ns, cdouble(1.0, 0.0) / std::sqrt(double(ns)));

    auto update_f = [&](const Eigen::RowVectorXcd& aux) {
        const CMatrix blend = eta * comm.entries + (1.0 - eta) * radar.entries * aux;
        return scaled_to_budget(blend, comm.power_budget, "tradeoff_am").entries;
    };
    auto update_aux = [&](const CMatrix& f) -> Eigen::RowVectorXcd {
        Eigen::RowVectorXcd m = radar.entries.adjoint() * f;
        const double nrm = m.norm();
        if (nrm == 0.0) return out.aux;
        return m / nrm;
    };

    CMatrix f = update_f(out.aux);
    out.objective_trace.push_back(tradeoff_objective(f, comm, radar, out.aux, eta));
    // The tail is geometric; the per-step drop alone understates the
    // remaining decrease by 1/(1 - rho), which near rho = 1 is large. Stop on
    // the extrapolated remainder drop * rho / (1 - rho), with rho taken as a
    // geometric mean over a short window since single-step ratios oscillate.
    constexpr int kRateWindow = 8;
    std::deque<double> drops;
    for (int it = 1; it < max_iterations; ++it) {
        out.aux = update_aux(f);
        f = update_f(out.aux);
        const double obj = tradeoff_objective(f, comm, radar, out.aux, eta);
        const double drop = out.objective_trace.back() - obj;
        out.objective_trace.push_back(obj);
        if (drop <= 0.0) {
            out.converged = true;
            break;
        }
        drops.push_back(drop);
        if (drops.size() > kRateWindow + 1) drops.pop_front();
        if (drops.size() >= 2) {
            const double span = static_cast<double>(drops.size() - 1);
            const double rho = std::pow(drop / drops.front(), 1.0 / span);
            if (rho < 1.0 && drop * rho / (1.0 - rho) <= epsilon) {
                out.converged = true;
                break;
            }
        }
    }
    out.precoder = Precoder{std::move(f), comm.power_budget};
    return out;
}

CMatrix tx_covariance(const Precoder& f) {
    require_finite(f.entries, "tx_covariance");
    CMatrix r = f.entries * f.entries.adjoint();
    return 0.5 * (r + r.adjoint());
}

namespace {

double pattern_cell(const CMatrix& rx_cov, const CVector& a) {
    return std::real((a.adjoint() * rx_cov * a)(0, 0));
}

}  // namespace

double beampattern_at(const CMatrix& rx_cov, const ArrayConfig& cfg, const PolarCoord& p) {
    return pattern_cell(rx_cov, near_focusing(cfg, p));
}

RVector beampattern_far_serial(const CMatrix& rx_cov, const ArrayConfig& cfg,
                               const std::vector<double>& angles) {
    require_finite(rx_cov, "beampattern_far");
    if (rx_cov.rows() != cfg.n_elements || rx_cov.cols() != cfg.n_elements)
        throw std::invalid_argument("beampattern_far: covariance size mismatch");
    RVector g(static_cast<Eigen::Index>(angles.size()));
    for (size_t i = 0; i < angles.size(); ++i)
        g(static_cast<Eigen::Index>(i)) = pattern_cell(rx_cov, far_steering(cfg, angles[i]));
    return g;
}

RVector beampattern_far(const CMatrix& rx_cov, const ArrayConfig& cfg,
                        const std::vector<double>& angles) {
    require_finite(rx_cov, "beampattern_far");
    if (rx_cov.rows() != cfg.n_elements || rx_cov.cols() != cfg.n_elements)
        throw std::invalid_argument("beampattern_far: covariance size mismatch");
    RVector g(static_cast<Eigen::Index>(angles.size()));
    const auto n = static_cast<Eigen::Index>(angles.size());
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i)
        g(i) = pattern_cell(rx_cov, far_steering(cfg, angles[static_cast<size_t>(i)]));
    return g;
}

RMatrix beampattern_near_serial(const CMatrix& rx_cov, const ArrayConfig& cfg,
                                const std::vector<double>& ranges,
                                const std::vector<double>& angles) {
    require_finite(rx_cov, "beampattern_near");
    RMatrix g(static_cast<Eigen::Index>(ranges.size()), static_cast<Eigen::Index>(angles.size()));
    for (size_t i = 0; i < ranges.size(); ++i)
        for (size_t j = 0; j < angles.size(); ++j)
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                pattern_cell(rx_cov, near_focusing(cfg, PolarCoord(ranges[i], angles[j])));
    return g;
}

RMatrix beampattern_near(const CMatrix& rx_cov, const ArrayConfig& cfg,
                         const std::vector<double>& ranges,
                         const std::vector<double>& angles) {
    require_finite(rx_cov, "beampattern_near");
    RMatrix g(static_cast<Eigen::Index>(ranges.size()), static_cast<Eigen::Index>(angles.size()));
    const auto cells = static_cast<Eigen::Index>(ranges.size() * angles.size());
    const auto na = static_cast<Eigen::Index>(angles.size());
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < cells; ++c) {
        const auto i = static_cast<size_t>(c / na);
        const auto j = static_cast<size_t>(c % na);
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            pattern_cell(rx_cov, near_focusing(cfg, PolarCoord(ranges[i], angles[j])));
    }
    return g;
}

}  // namespace nfisac
