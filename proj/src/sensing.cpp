#include "nfisac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nfisac/stats.hpp"

namespace nfisac {

TargetTruth TargetTruth::from_tx(cdouble beta, const PolarCoord& tx,
                                 const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx) {
    TargetTruth t;
    t.beta = beta;
    t.tx = tx;
    t.rx = rx_geometry(tx, cfg_tx, cfg_rx);
    return t;
}

TargetTruth TargetTruth::from_rx(cdouble beta, const PolarCoord& rx,
                                 const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx) {
    TargetTruth t;
    t.beta = beta;
    t.rx = rx;
    t.tx = tx_geometry(rx, cfg_tx, cfg_rx);
    return t;
}

CMatrix synthesize_symbols(int n_streams, int snapshots, Rng& rng) {
    if (n_streams < 1 || snapshots < 1)
        throw std::invalid_argument("synthesize_symbols: dimensions must be positive");
    static const double h = std::sqrt(0.5);
    static const cdouble alphabet[4] = {{h, h}, {h, -h}, {-h, h}, {-h, -h}};
    CMatrix s(n_streams, snapshots);
    for (Eigen::Index c = 0; c < s.cols(); ++c)
        for (Eigen::Index r = 0; r < s.rows(); ++r)
            s(r, c) = alphabet[rng.uniform_index(4)];
    return s;
}

CVector rx_focusing(const ArrayConfig& cfg_rx, const PolarCoord& p) {
    return near_focusing(cfg_rx, p);
}

EchoBatch synthesize_echo(const Precoder& f, const CMatrix& symbols,
                          const TargetTruth& truth, const ArrayConfig& cfg_tx,
                          const ArrayConfig& cfg_rx, double noise_power, Rng& rng) {
    require_finite(f.entries, "synthesize_echo precoder");
    require_finite(symbols, "synthesize_echo symbols");
    if (f.entries.rows() != cfg_tx.n_elements)
        throw std::invalid_argument("synthesize_echo: precoder/array size mismatch");
    if (symbols.rows() != f.entries.cols())
        throw std::invalid_argument("synthesize_echo: symbol/stream count mismatch");
    if (noise_power < 0.0)
        throw std::invalid_argument("synthesize_echo: negative noise power");

    const CVector a = near_focusing(cfg_tx, truth.tx);
    const CVector b = rx_focusing(cfg_rx, truth.rx);
    const Eigen::RowVectorXcd waveform = (a.adjoint() * f.entries) * symbols;  // 1 x L

    EchoBatch out;
    out.noise_power = noise_power;
    out.y = truth.beta * b * waveform;
    if (noise_power > 0.0) {
        const double dev = std::sqrt(0.5 * noise_power);
        for (Eigen::Index c = 0; c < out.y.cols(); ++c)
            for (Eigen::Index r = 0; r < out.y.rows(); ++r)
                out.y(r, c) += rng.cnormal(dev);
    }
    return out;
}

CMatrix sample_covariance(const CMatrix& y) {
    require_finite(y, "sample_covariance");
    CMatrix r = y * y.adjoint() / static_cast<double>(y.cols());
    return 0.5 * (r + r.adjoint());
}

CMatrix noise_subspace(const CMatrix& sample_cov, int n_sources) {
    if (n_sources < 1 || n_sources >= sample_cov.rows())
        throw std::invalid_argument("noise_subspace: source count must lie in [1, N_r)");
    const EigResult eig = hermitian_eig(sample_cov);
    return eig.vectors.rightCols(sample_cov.rows() - n_sources);
}

MusicGrid MusicGrid::regular(double r_min, double r_max, double r_step,
                             double a_min, double a_max, double a_step) {
    if (!(r_min > 0.0) || !(r_step > 0.0) || !(a_step > 0.0) || r_max < r_min || a_max < a_min)
        throw std::invalid_argument("MusicGrid: bad extents");
    MusicGrid g;
    const auto fill = [](std::vector<double>& v, double lo, double hi, double step) {
        const auto n = static_cast<size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
        v.resize(n);
        for (size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
    };
    fill(g.ranges, r_min, r_max, r_step);
    fill(g.angles, a_min, a_max, a_step);
    return g;
}

namespace {

double spectrum_cell(const CMatrix& projector, const ArrayConfig& cfg_rx,
                     double range, double angle) {
    const CVector b = near_focusing(cfg_rx, PolarCoord(range, angle));
    double denom = std::real((b.adjoint() * projector * b)(0, 0));
    // Noiseless on-grid cells drive the quadratic to rounding level; clamp so
    // the spectrum stays finite and the argmax is still that cell.
    const double floor_val = 1e-18 * cfg_rx.n_elements;
    if (denom < floor_val) denom = floor_val;
    return 1.0 / denom;
}

// Same quadratic as spectrum_cell, evaluated through the signal-subspace
// complement: b^H (I - U_s U_s^H) b. Costs O(N_r M) per cell.
double complement_cell(const CMatrix& signal_basis, const ArrayConfig& cfg_rx,
                       double range, double angle) {
    const CVector b = near_focusing(cfg_rx, PolarCoord(range, angle));
    double denom = b.squaredNorm() - (signal_basis.adjoint() * b).squaredNorm();
    const double floor_val = 1e-18 * cfg_rx.n_elements;
    if (denom < floor_val) denom = floor_val;
    return 1.0 / denom;
}

void check_grid(const MusicGrid& grid) {
    if (grid.ranges.empty() || grid.angles.empty())
        throw std::invalid_argument("music_spectrum: empty grid");
    if (!std::is_sorted(grid.ranges.begin(), grid.ranges.end()) ||
        !std::is_sorted(grid.angles.begin(), grid.angles.end()))
        throw std::invalid_argument("music_spectrum: grid axes must be increasing");
}

void check_music_inputs(const CMatrix& noise_basis, const ArrayConfig& cfg_rx,
                        const MusicGrid& grid) {
    require_finite(noise_basis, "music_spectrum");
    if (noise_basis.rows() != cfg_rx.n_elements)
        throw std::invalid_argument("music_spectrum: basis/array size mismatch");
    check_grid(grid);
}

}  // namespace

RMatrix music_spectrum_serial(const CMatrix& noise_basis, const ArrayConfig& cfg_rx,
                              const MusicGrid& grid) {
    check_music_inputs(noise_basis, cfg_rx, grid);
    const CMatrix projector = noise_basis * noise_basis.adjoint();
    RMatrix s(static_cast<Eigen::Index>(grid.ranges.size()),
              static_cast<Eigen::Index>(grid.angles.size()));
    for (size_t i = 0; i < grid.ranges.size(); ++i)
        for (size_t j = 0; j < grid.angles.size(); ++j)
            s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                spectrum_cell(projector, cfg_rx, grid.ranges[i], grid.angles[j]);
    return s;
}

RMatrix music_spectrum(const CMatrix& noise_basis, const ArrayConfig& cfg_rx,
                       const MusicGrid& grid) {
    check_music_inputs(noise_basis, cfg_rx, grid);
    const CMatrix projector = noise_basis * noise_basis.adjoint();
    const auto na = static_cast<Eigen::Index>(grid.angles.size());
    const auto cells = static_cast<Eigen::Index>(grid.cells());
    RMatrix s(static_cast<Eigen::Index>(grid.ranges.size()), na);
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < cells; ++c) {
        const auto i = c / na;
        const auto j = c % na;
        s(i, j) = spectrum_cell(projector, cfg_rx, grid.ranges[static_cast<size_t>(i)],
                                grid.angles[static_cast<size_t>(j)]);
    }
    return s;
}

namespace {

// Quadratic vertex through (-1, ym), (0, y0), (+1, yp); offset in cells.
double parabolic_offset(double ym, double y0, double yp) {
    const double denom = ym - 2.0 * y0 + yp;
    if (denom >= 0.0) return 0.0;  // not a local max
    double off = 0.5 * (ym - yp) / denom;
    return std::clamp(off, -0.5, 0.5);
}

}  // namespace

MusicEstimate music_estimate(const RMatrix& spectrum, const MusicGrid& grid,
                             const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx,
                             bool parabolic_refine) {
    if (spectrum.rows() != static_cast<Eigen::Index>(grid.ranges.size()) ||
        spectrum.cols() != static_cast<Eigen::Index>(grid.angles.size()))
        throw std::invalid_argument("music_estimate: spectrum/grid size mismatch");

    Eigen::Index pi = 0, pj = 0;
    const double peak = spectrum.maxCoeff(&pi, &pj);

    std::vector<double> flat(spectrum.data(), spectrum.data() + spectrum.size());
    auto mid = flat.begin() + flat.size() / 2;
    std::nth_element(flat.begin(), mid, flat.end());
    const double median = *mid;

    MusicEstimate est;
    est.peak_found = peak >= 1.5 * median;
    est.range_index = static_cast<size_t>(pi);
    est.angle_index = static_cast<size_t>(pj);
    est.peak_value = peak;

    double r = grid.ranges[est.range_index];
    double a = grid.angles[est.angle_index];
    if (parabolic_refine) {
        if (pi > 0 && pi + 1 < spectrum.rows()) {
            const double dr = grid.ranges[est.range_index + 1] - grid.ranges[est.range_index - 1];
            r += 0.5 * dr *
                 parabolic_offset(spectrum(pi - 1, pj), peak, spectrum(pi + 1, pj));
        }
        if (pj > 0 && pj + 1 < spectrum.cols()) {
            const double da = grid.angles[est.angle_index + 1] - grid.angles[est.angle_index - 1];
            a += 0.5 * da *
                 parabolic_offset(spectrum(pi, pj - 1), peak, spectrum(pi, pj + 1));
        }
    }
    est.rx = PolarCoord(r, a);
    est.tx = tx_geometry(est.rx, cfg_tx, cfg_rx);
    return est;
}

MusicSearchOptions MusicSearchOptions::standard(const ArrayConfig& cfg_rx, MusicGrid fine) {
    MusicSearchOptions opts;
    opts.fine = std::move(fine);

    // Survey strides: at most half the main-lobe width per angle step and
    // half a meter per range step, so the first pass cannot skip the peak.
    // Later stages shrink the strides until the lattice is walked natively.
    const double beamwidth = cfg_rx.wavelength / (cfg_rx.n_elements * cfg_rx.spacing);
    const double a_step = opts.fine.angles.size() > 1
                              ? opts.fine.angles[1] - opts.fine.angles[0]
                              : beamwidth;
    const double r_step =
        opts.fine.ranges.size() > 1 ? opts.fine.ranges[1] - opts.fine.ranges[0] : 0.5;
    const auto clamped = [](double v) {
        return std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(v), 64));
    };
    size_t a_stride = clamped(0.5 * beamwidth / a_step);
    size_t r_stride = clamped(0.5 / r_step);
    while (r_stride > 1 || a_stride > 1) {
        opts.plan.push_back(MusicSearchStage{r_stride, a_stride});
        r_stride = std::max<size_t>(1, r_stride / 5);
        a_stride = std::max<size_t>(1, a_stride / 5);
    }
    opts.plan.push_back(MusicSearchStage{1, 1});
    return opts;
}

MusicSearchOptions MusicSearchOptions::standard(const ArrayConfig& cfg_rx) {
    constexpr double deg = std::numbers::pi / 180.0;
    return standard(cfg_rx, MusicGrid::regular(1.0, 30.0, 0.1, -90.0 * deg, 90.0 * deg,
                                               0.25 * deg));
}

MusicEstimate music_locate(const CMatrix& sample_cov, int n_sources,
                           const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx,
                           const MusicSearchOptions& opts) {
    require_finite(sample_cov, "music_locate");
    if (sample_cov.rows() != sample_cov.cols() || sample_cov.rows() != cfg_rx.n_elements)
        throw std::invalid_argument("music_locate: covariance/array size mismatch");
    if (n_sources < 1 || n_sources >= sample_cov.rows())
        throw std::invalid_argument("music_locate: source count must lie in [1, N_r)");
    check_grid(opts.fine);
    if (opts.plan.empty())
        throw std::invalid_argument("music_locate: empty search plan");
    if (opts.plan.back().range_stride != 1 || opts.plan.back().angle_stride != 1)
        throw std::invalid_argument("music_locate: final stage must have stride 1");

    const CMatrix signal_basis = hermitian_eig(sample_cov).vectors.leftCols(n_sources);
    const auto nr = opts.fine.ranges.size();
    const auto na = opts.fine.angles.size();

    const auto lattice = [](size_t lo, size_t hi, size_t stride) {
        std::vector<size_t> idx;
        for (size_t i = lo; i <= hi; i += stride) idx.push_back(i);
        return idx;
    };

    size_t ri = 0, ai = 0;  // current peak, fine-lattice indices
    size_t prev_rs = nr, prev_as = na;  // window half-widths, start = whole grid
    // Near-field range lobes have flat tops meters wide, so the coarse argmax
    // can sit several coarse cells from the true peak; each refinement window
    // therefore spans a band of coarse cells, not just the adjacent ones.
    constexpr size_t kWindowCoarseCells = 8;
    double best = 0.0;
    double survey_median = 0.0;  // from the full-grid coarse pass
    std::vector<double> window_vals;
    std::vector<size_t> ridx, aidx;

    for (size_t stage = 0; stage < opts.plan.size(); ++stage) {
        const auto& st = opts.plan[stage];
        if (st.range_stride == 0 || st.angle_stride == 0)
            throw std::invalid_argument("music_locate: zero stride");
        if (stage == 0) {
            ridx = lattice(0, nr - 1, st.range_stride);
            aidx = lattice(0, na - 1, st.angle_stride);
        } else {
            const size_t rlo = ri > prev_rs ? ri - prev_rs : 0;
            const size_t rhi = std::min(ri + prev_rs, nr - 1);
            const size_t alo = ai > prev_as ? ai - prev_as : 0;
            const size_t ahi = std::min(ai + prev_as, na - 1);
            ridx = lattice(rlo, rhi, st.range_stride);
            aidx = lattice(alo, ahi, st.angle_stride);
        }

        const auto cells = static_cast<Eigen::Index>(ridx.size() * aidx.size());
        window_vals.assign(static_cast<size_t>(cells), 0.0);
#pragma omp parallel for schedule(static)
        for (Eigen::Index c = 0; c < cells; ++c) {
            const size_t i = static_cast<size_t>(c) / aidx.size();
            const size_t j = static_cast<size_t>(c) % aidx.size();
            window_vals[static_cast<size_t>(c)] = complement_cell(
                signal_basis, cfg_rx, opts.fine.ranges[ridx[i]], opts.fine.angles[aidx[j]]);
        }

        const auto it = std::max_element(window_vals.begin(), window_vals.end());
        const auto flat = static_cast<size_t>(it - window_vals.begin());
        ri = ridx[flat / aidx.size()];
        ai = aidx[flat % aidx.size()];
        best = *it;
        prev_rs = kWindowCoarseCells * st.range_stride;
        prev_as = kWindowCoarseCells * st.angle_stride;

        if (stage == 0) {
            // Flatness reference comes from the whole-grid pass; later
            // windows hug the peak and would bias the median upward.
            std::vector<double> flat_copy = window_vals;
            auto mid = flat_copy.begin() + flat_copy.size() / 2;
            std::nth_element(flat_copy.begin(), mid, flat_copy.end());
            survey_median = *mid;
        }
    }

    MusicEstimate est;
    est.peak_found = best >= 1.5 * survey_median;
    est.range_index = ri;
    est.angle_index = ai;
    est.peak_value = best;

    double r = opts.fine.ranges[ri];
    double a = opts.fine.angles[ai];
    if (opts.parabolic_refine && ri > 0 && ri + 1 < nr && ai > 0 && ai + 1 < na) {
        const double sm_r0 = complement_cell(signal_basis, cfg_rx, opts.fine.ranges[ri - 1], a);
        const double sp_r0 = complement_cell(signal_basis, cfg_rx, opts.fine.ranges[ri + 1], a);
        const double sm_a0 = complement_cell(signal_basis, cfg_rx, r, opts.fine.angles[ai - 1]);
        const double sp_a0 = complement_cell(signal_basis, cfg_rx, r, opts.fine.angles[ai + 1]);
        r += (opts.fine.ranges[ri + 1] - opts.fine.ranges[ri]) *
             parabolic_offset(sm_r0, best, sp_r0);
        a += (opts.fine.angles[ai + 1] - opts.fine.angles[ai]) *
             parabolic_offset(sm_a0, best, sp_a0);
    }
    est.rx = PolarCoord(r, a);
    est.tx = tx_geometry(est.rx, cfg_tx, cfg_rx);
    return est;
}

double detection_statistic(const EchoBatch& echo, const ArrayConfig& cfg_rx,
                           const PolarCoord& candidate) {
    require_finite(echo.y, "detection_statistic");
    if (echo.y.rows() != cfg_rx.n_elements)
        throw std::invalid_argument("detection_statistic: echo/array size mismatch");
    if (!(echo.noise_power > 0.0))
        throw std::invalid_argument("detection_statistic: needs positive noise power");
    const CVector b = rx_focusing(cfg_rx, candidate);
    const double energy = (b.adjoint() * echo.y).squaredNorm();
    return energy / (cfg_rx.n_elements * echo.noise_power * echo.snapshots());
}

bool detect(const EchoBatch& echo, const ArrayConfig& cfg_rx,
            const PolarCoord& candidate, double threshold) {
    return detection_statistic(echo, cfg_rx, candidate) > threshold;
}

double threshold_from_pfa(double p_fa, int calibration_draws, int snapshots, Rng& rng) {
    if (!(p_fa > 0.0 && p_fa < 1.0))
        throw std::invalid_argument("threshold_from_pfa: p_fa must lie in (0, 1)");
    if (snapshots < 1)
        throw std::invalid_argument("threshold_from_pfa: snapshots must be positive");
    if (static_cast<double>(calibration_draws) * p_fa < 10.0)
        throw std::invalid_argument(
            "threshold_from_pfa: too few calibration draws for the requested quantile");

    std::vector<double> stats(static_cast<size_t>(calibration_draws));
    for (auto& t : stats) {
        // b^H z_l ~ CN(0, N_r sigma_w^2) iid over snapshots; the normalized
        // statistic is a sum of 2L squared unit normals over 2L.
        double acc = 0.0;
        for (int l = 0; l < snapshots; ++l) {
            const double x = rng.normal();
            const double y = rng.normal();
            acc += x * x + y * y;
        }
        t = acc / (2.0 * snapshots);
    }
    const auto k = static_cast<size_t>(
        std::min<double>(std::ceil((1.0 - p_fa) * calibration_draws),
                         static_cast<double>(calibration_draws) - 1.0));
    std::nth_element(stats.begin(), stats.begin() + static_cast<long>(k), stats.end());
    return stats[k];
}

double threshold_analytic(double p_fa, int snapshots) {
    if (!(p_fa > 0.0 && p_fa < 1.0))
        throw std::invalid_argument("threshold_analytic: p_fa must lie in (0, 1)");
    if (snapshots < 1)
        throw std::invalid_argument("threshold_analytic: snapshots must be positive");
    return chi_square_quantile(1.0 - p_fa, 2.0 * snapshots) / (2.0 * snapshots);
}

}  // namespace nfisac
