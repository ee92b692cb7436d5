#include "nfisac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nfisac {

namespace {
constexpr double kPi = std::numbers::pi;

void check_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
}
}  // namespace

double wavelength_from_carrier(double carrier_hz) {
    check_positive(carrier_hz, "carrier frequency");
    return kSpeedOfLight / carrier_hz;
}

ArrayConfig::ArrayConfig(int n, double d, double lambda)
    : n_elements(n), spacing(d), wavelength(lambda) {
    if (n < 2) throw std::invalid_argument("array needs at least 2 elements");
    check_positive(d, "element spacing");
    check_positive(lambda, "wavelength");
}

bool ArrayConfig::half_wavelength_spacing() const {
    return std::abs(spacing - 0.5 * wavelength) <= 1e-12 * wavelength;
}

PolarCoord::PolarCoord(double r, double theta) : range(r), angle(theta) {
    check_positive(r, "range");
    if (!(std::abs(theta) < 0.5 * kPi))
        throw std::invalid_argument("angle must lie strictly inside (-pi/2, pi/2)");
}

double fraunhofer_distance(double aperture, double wavelength) {
    check_positive(aperture, "aperture");
    check_positive(wavelength, "wavelength");
    return 2.0 * aperture * aperture / wavelength;
}

double fresnel_boundary(double aperture, double wavelength) {
    check_positive(aperture, "aperture");
    check_positive(wavelength, "wavelength");
    return 0.62 * std::sqrt(aperture * aperture * aperture / wavelength);
}

CVector far_steering(const ArrayConfig& cfg, double angle) {
    const int n = cfg.n_elements;
    const double s = std::sin(angle);
    CVector a(n);
    for (int k = 0; k < n; ++k) {
        const double phase = 2.0 * kPi * cfg.delta(k) * cfg.spacing * s / cfg.wavelength;
        a(k) = cdouble(std::cos(phase), std::sin(phase));
    }
    return a;
}

CVector near_focusing(const ArrayConfig& cfg, const PolarCoord& p) {
    const int n = cfg.n_elements;
    const double r = p.range;
    const double s = std::sin(p.angle);
    CVector a(n);
    for (int k = 0; k < n; ++k) {
        const double off = cfg.delta(k) * cfg.spacing;
        const double rn = std::sqrt(r * r + off * off - 2.0 * r * off * s);
        // r_n - r computed without cancellation: (r_n^2 - r^2)/(r_n + r).
        const double diff = (off * off - 2.0 * r * off * s) / (rn + r);
        const double phase = -2.0 * kPi * diff / cfg.wavelength;
        a(k) = cdouble(std::cos(phase), std::sin(phase));
    }
    return a;
}

CVector fresnel_focusing(const ArrayConfig& cfg, const PolarCoord& p) {
    const int n = cfg.n_elements;
    const double s = std::sin(p.angle);
    const double c = std::cos(p.angle);
    const double quad = cfg.spacing * cfg.spacing * c * c / (p.range * cfg.wavelength);
    const double lin = 2.0 * cfg.spacing * s / cfg.wavelength;
    CVector a(n);
    for (int k = 0; k < n; ++k) {
        const double dk = cfg.delta(k);
        const double phase = -kPi * (dk * dk * quad - dk * lin);
        a(k) = cdouble(std::cos(phase), std::sin(phase));
    }
    return a;
}

Eigen::MatrixXi fresnel_w_matrix(int n_elements) {
    if (n_elements < 4 || n_elements % 2 != 0)
        throw std::invalid_argument("fresnel_w_matrix: N must be even and >= 4");
    const int m = n_elements / 2 - 1;
    Eigen::MatrixXi w = Eigen::MatrixXi::Zero(m, m);
    for (int i = 1; i <= m; ++i)
        for (int j = i; j <= m; ++j)
            w(i - 1, j - 1) = (i - 1) * (i - 1) - j * j + (n_elements - 1) * (j + 1 - i);
    return w;
}

double gain_loss_exact(const ArrayConfig& cfg, const PolarCoord& p) {
    const CVector far = far_steering(cfg, p.angle);
    const CVector near = near_focusing(cfg, p);
    const double overlap = std::abs(far.dot(near));  // dot() conjugates far
    return 1.0 - overlap / cfg.n_elements;
}

double gain_loss_approx(const ArrayConfig& cfg, const PolarCoord& p) {
    const int n = cfg.n_elements;
    if (n % 2 != 0 || n < 4)
        throw std::invalid_argument("gain_loss_approx: N must be even and >= 4");
    if (!cfg.half_wavelength_spacing())
        throw std::invalid_argument("gain_loss_approx: requires half-wavelength spacing");

    const double c = std::cos(p.angle);
    const double x = cfg.wavelength * kPi * c * c / (4.0 * p.range);
    const Eigen::MatrixXi w = fresnel_w_matrix(n);
    double sum = 0.0;
    for (int i = 0; i < w.rows(); ++i)
        for (int j = i; j < w.cols(); ++j)
            sum += std::cos(x * w(i, j));
    const double inner = 2.0 * n + 8.0 * sum;
    return 1.0 - std::sqrt(std::max(inner, 0.0)) / n;
}

namespace {

// Shared body of the bistatic transform; see header for why one function
// serves both directions.
PolarCoord bistatic_mirror(const PolarCoord& p, double center_offset) {
    const double s = std::sin(p.angle);
    const double r2 = p.range * p.range + center_offset * center_offset -
                      2.0 * p.range * center_offset * s;
    if (!(r2 > 0.0))
        throw std::invalid_argument("bistatic transform: point coincides with the other array center");
    const double r = std::sqrt(r2);
    double sin_out = (center_offset - p.range * s) / r;
    if (std::abs(sin_out) > 1.0 + 1e-9)
        throw std::invalid_argument("bistatic transform: inconsistent geometry");
    sin_out = std::clamp(sin_out, -1.0, 1.0);
    return PolarCoord(r, std::asin(sin_out));
}

double center_offset(const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx) {
    if (std::abs(cfg_tx.spacing - cfg_rx.spacing) > 1e-12 * cfg_tx.spacing)
        throw std::invalid_argument("bistatic transform: arrays must share element spacing");
    return 0.5 * (cfg_tx.n_elements + cfg_rx.n_elements) * cfg_tx.spacing;
}

}  // namespace

PolarCoord rx_geometry(const PolarCoord& tx, const ArrayConfig& cfg_tx,
                       const ArrayConfig& cfg_rx) {
    return bistatic_mirror(tx, center_offset(cfg_tx, cfg_rx));
}

PolarCoord tx_geometry(const PolarCoord& rx, const ArrayConfig& cfg_tx,
                       const ArrayConfig& cfg_rx) {
    return bistatic_mirror(rx, center_offset(cfg_tx, cfg_rx));
}

}  // namespace nfisac
