#include "nfisac/crb.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nfisac {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// d/dr and d/dtheta of a focusing vector at its own coordinates.
struct FocusingDerivs {
    CVector d_range;
    CVector d_angle;
};

FocusingDerivs focusing_derivs(const ArrayConfig& cfg, const PolarCoord& p) {
    const int n = cfg.n_elements;
    const double r = p.range;
    const double s = std::sin(p.angle);
    const double c = std::cos(p.angle);
    const CVector a = near_focusing(cfg, p);
    FocusingDerivs out{CVector(n), CVector(n)};
    for (int k = 0; k < n; ++k) {
        const double o = cfg.delta(k) * cfg.spacing;
        const double rn = std::sqrt(r * r + o * o - 2.0 * r * o * s);
        const double drn_dr = (r - o * s) / rn;
        const double drn_dth = -r * o * c / rn;
        // phase = -(2 pi / lambda)(r_n - r)
        const double dpsi_dr = -(kTwoPi / cfg.wavelength) * (drn_dr - 1.0);
        const double dpsi_dth = -(kTwoPi / cfg.wavelength) * drn_dth;
        out.d_range(k) = cdouble(0.0, dpsi_dr) * a(k);
        out.d_angle(k) = cdouble(0.0, dpsi_dth) * a(k);
    }
    return out;
}

// Jacobian of the bistatic transform (r_r, theta_r) w.r.t. (r_t, theta_t).
struct BistaticJacobian {
    double drr_drt, drr_dtht;
    double dthr_drt, dthr_dtht;
};

BistaticJacobian bistatic_jacobian(const PolarCoord& tx, const PolarCoord& rx,
                                   double offset) {
    const double st = std::sin(tx.angle), ct = std::cos(tx.angle);
    const double sr = std::sin(rx.angle), cr = std::cos(rx.angle);
    const double rr = rx.range;
    BistaticJacobian j;
    j.drr_drt = (tx.range - offset * st) / rr;
    j.drr_dtht = -tx.range * offset * ct / rr;
    const double dsr_drt = (-st - sr * j.drr_drt) / rr;
    const double dsr_dtht = (-tx.range * ct - sr * j.drr_dtht) / rr;
    j.dthr_drt = dsr_drt / cr;
    j.dthr_dtht = dsr_dtht / cr;
    return j;
}

double trace_real(const CMatrix& x, const CMatrix& y) {
    // Re tr(x y^H) without forming the product.
    return x.cwiseProduct(y.conjugate()).sum().real();
}

cdouble trace_prod_adj(const CMatrix& x, const CMatrix& y) {
    // tr(x y^H)
    return x.cwiseProduct(y.conjugate()).sum();
}

}  // namespace

CMatrix g_matrix(const TargetTruth& truth, const ArrayConfig& cfg_tx,
                 const ArrayConfig& cfg_rx) {
    const CVector a = near_focusing(cfg_tx, truth.tx);
    const CVector b = rx_focusing(cfg_rx, truth.rx);
    return b * a.adjoint();
}

GDerivatives g_derivatives(const TargetTruth& truth, const ArrayConfig& cfg_tx,
                           const ArrayConfig& cfg_rx, DerivMode mode) {
    if (mode == DerivMode::kFiniteDifference) {
        const double hr = 1e-4 * truth.tx.range;
        const double hth = 1e-6;
        const auto at = [&](double r, double th) {
            return g_matrix(TargetTruth::from_tx(truth.beta, PolarCoord(r, th), cfg_tx, cfg_rx),
                            cfg_tx, cfg_rx);
        };
        GDerivatives out;
        out.d_range =
            (at(truth.tx.range + hr, truth.tx.angle) - at(truth.tx.range - hr, truth.tx.angle)) /
            (2.0 * hr);
        out.d_angle =
            (at(truth.tx.range, truth.tx.angle + hth) - at(truth.tx.range, truth.tx.angle - hth)) /
            (2.0 * hth);
        return out;
    }

    const double offset = 0.5 * (cfg_tx.n_elements + cfg_rx.n_elements) * cfg_tx.spacing;
    const CVector a = near_focusing(cfg_tx, truth.tx);
    const CVector b = rx_focusing(cfg_rx, truth.rx);
    const FocusingDerivs da = focusing_derivs(cfg_tx, truth.tx);
    const FocusingDerivs db = focusing_derivs(cfg_rx, truth.rx);
    const BistaticJacobian jac = bistatic_jacobian(truth.tx, truth.rx, offset);

    // b depends on (r_t, theta_t) only through the transform.
    const CVector db_drt = db.d_range * jac.drr_drt + db.d_angle * jac.dthr_drt;
    const CVector db_dtht = db.d_range * jac.drr_dtht + db.d_angle * jac.dthr_dtht;

    GDerivatives out;
    out.d_range = db_drt * a.adjoint() + b * da.d_range.adjoint();
    out.d_angle = db_dtht * a.adjoint() + b * da.d_angle.adjoint();
    return out;
}

FimBlocks fim_blocks(const CMatrix& g, const GDerivatives& dg, const CMatrix& rx_cov,
                     cdouble beta, int snapshots, double noise_power) {
    require_finite(g, "fim_blocks");
    require_finite(rx_cov, "fim_blocks covariance");
    if (rx_cov.rows() != rx_cov.cols() || rx_cov.rows() != g.cols())
        throw std::invalid_argument("fim_blocks: covariance size mismatch");
    if (snapshots < 1)
        throw std::invalid_argument("fim_blocks: snapshots must be positive");
    if (!(noise_power > 0.0))
        throw std::invalid_argument("fim_blocks: noise power must be positive");

    const double c = 2.0 * snapshots / noise_power;
    const double b2 = std::norm(beta);
    const CMatrix g_r = g * rx_cov;          // G R_x
    const CMatrix d1_r = dg.d_range * rx_cov;
    const CMatrix d2_r = dg.d_angle * rx_cov;

    FimBlocks out;
    out.phi_phi.resize(2, 2);
    out.phi_phi(0, 0) = c * b2 * trace_real(d1_r, dg.d_range);
    out.phi_phi(0, 1) = c * b2 * trace_real(d2_r, dg.d_range);
    out.phi_phi(1, 0) = c * b2 * trace_real(d1_r, dg.d_angle);
    out.phi_phi(1, 1) = c * b2 * trace_real(d2_r, dg.d_angle);

    const cdouble t1 = trace_prod_adj(g_r, dg.d_range);
    const cdouble t2 = trace_prod_adj(g_r, dg.d_angle);
    const cdouble bc = std::conj(beta);
    out.phi_beta.resize(2, 2);
    out.phi_beta(0, 0) = c * std::real(bc * t1);
    out.phi_beta(0, 1) = -c * std::imag(bc * t1);
    out.phi_beta(1, 0) = c * std::real(bc * t2);
    out.phi_beta(1, 1) = -c * std::imag(bc * t2);

    out.beta_beta = c * trace_real(g_r, g) * RMatrix::Identity(2, 2);
    return out;
}

namespace {

RMatrix pinv_real(const RMatrix& m, bool* rank_deficient) {
    Eigen::JacobiSVD<RMatrix> s(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = s.singularValues().size() ? s.singularValues()(0) : 0.0;
    const double tol = std::max(m.rows(), m.cols()) * smax *
                       std::numeric_limits<double>::epsilon();
    RMatrix out = RMatrix::Zero(m.cols(), m.rows());
    if (rank_deficient) *rank_deficient = false;
    for (Eigen::Index i = 0; i < s.singularValues().size(); ++i) {
        const double sv = s.singularValues()(i);
        if (sv > tol && sv > 1e-12 * std::max(smax, 1e-300))
            out += (1.0 / sv) * s.matrixV().col(i) * s.matrixU().col(i).transpose();
        else if (rank_deficient)
            *rank_deficient = true;
    }
    return out;
}

void fill_report(CrbReport& rep, const RMatrix& crb) {
    rep.matrix = crb;
    rep.crb_range = crb(0, 0);
    rep.crb_angle = crb(1, 1);
    rep.rcrb_range = crb(0, 0) > 0.0 ? std::sqrt(crb(0, 0)) : 0.0;
    rep.rcrb_angle = crb(1, 1) > 0.0 ? std::sqrt(crb(1, 1)) : 0.0;
}

}  // namespace

double snr_r(cdouble beta, int snapshots, double power_budget, double noise_power) {
    if (!(noise_power > 0.0))
        throw std::invalid_argument("snr_r: noise power must be positive");
    return std::norm(beta) * snapshots * power_budget / noise_power;
}

CrbReport crb_matrix(const FimBlocks& blocks, cdouble beta, int snapshots,
                     double noise_power, double power_budget) {
    CrbReport rep;
    rep.snr_r = snr_r(beta, snapshots, power_budget, noise_power);

    const double jbb = blocks.beta_beta(0, 0);
    if (!(jbb > 0.0) || std::norm(beta) == 0.0) {
        rep.infinite = true;
        return rep;
    }
    const RMatrix schur =
        blocks.phi_phi - blocks.phi_beta * blocks.phi_beta.transpose() / jbb;
    bool deficient = false;
    const RMatrix crb = pinv_real(schur, &deficient);
    rep.infinite = deficient;
    fill_report(rep, crb);
    return rep;
}

CrbReport crb_matrix_explicit(const CMatrix& g, const GDerivatives& dg,
                              const CMatrix& rx_cov, cdouble beta, int snapshots,
                              double noise_power) {
    if (!(noise_power > 0.0))
        throw std::invalid_argument("crb_matrix_explicit: noise power must be positive");
    if (snapshots < 1)
        throw std::invalid_argument("crb_matrix_explicit: snapshots must be positive");

    const double power = std::real(rx_cov.trace());
    CrbReport rep;
    rep.snr_r = snr_r(beta, snapshots, power, noise_power);

    const CMatrix g_r = g * rx_cov;
    const double tr_g = trace_real(g_r, g);  // tr(G R_x G^H)
    if (!(tr_g > 0.0) || std::norm(beta) == 0.0) {
        rep.infinite = true;
        return rep;
    }
    const cdouble t1 = trace_prod_adj(g_r, dg.d_range);
    const cdouble t2 = trace_prod_adj(g_r, dg.d_angle);
    const CMatrix d1_r = dg.d_range * rx_cov;
    const CMatrix d2_r = dg.d_angle * rx_cov;

    RMatrix m(2, 2);
    m(0, 0) = trace_real(d1_r, dg.d_range) * tr_g - std::norm(t1);
    m(1, 1) = trace_real(d2_r, dg.d_angle) * tr_g - std::norm(t2);
    m(0, 1) = std::real(trace_prod_adj(d2_r, dg.d_range) * tr_g - t1 * std::conj(t2));
    m(1, 0) = std::real(trace_prod_adj(d1_r, dg.d_angle) * tr_g - t1 * std::conj(t2));

    const double prefactor = noise_power * tr_g / (2.0 * snapshots * std::norm(beta));
    bool deficient = false;
    const RMatrix crb = prefactor * pinv_real(m, &deficient);
    rep.infinite = deficient;
    fill_report(rep, crb);
    return rep;
}

namespace {

double scalar_crb(const CMatrix& g, const CMatrix& dg_kept, const CMatrix& rx_cov,
                  cdouble beta, int snapshots, double noise_power) {
    if (!(noise_power > 0.0) || snapshots < 1)
        throw std::invalid_argument("scalar crb: bad snapshots or noise power");
    const CMatrix g_r = g * rx_cov;
    const double tr_g = trace_real(g_r, g);
    if (!(tr_g > 0.0) || std::norm(beta) == 0.0)
        return std::numeric_limits<double>::infinity();
    const cdouble t = trace_prod_adj(g_r, dg_kept);
    const double denom = trace_real(dg_kept * rx_cov, dg_kept) * tr_g - std::norm(t);
    if (!(denom > 0.0))
        return std::numeric_limits<double>::infinity();
    const double prefactor = noise_power * tr_g / (2.0 * snapshots * std::norm(beta));
    return prefactor / denom;
}

}  // namespace

double crb_angle_known_range(const CMatrix& g, const GDerivatives& dg,
                             const CMatrix& rx_cov, cdouble beta, int snapshots,
                             double noise_power) {
    return scalar_crb(g, dg.d_angle, rx_cov, beta, snapshots, noise_power);
}

double crb_range_known_angle(const CMatrix& g, const GDerivatives& dg,
                             const CMatrix& rx_cov, cdouble beta, int snapshots,
                             double noise_power) {
    return scalar_crb(g, dg.d_range, rx_cov, beta, snapshots, noise_power);
}

}  // namespace nfisac
