#ifndef NFISAC_SENSING_HPP
#define NFISAC_SENSING_HPP

#include <optional>
#include <vector>

#include "nfisac/beamform.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/numkernel.hpp"
#include "nfisac/rng.hpp"

// Bistatic echo model and target localization. The transmit array radiates
// X = F S; a point target at tx coordinates (r_t, theta_t) reflects it into
// the receive array, whose view of the same point is given by the bistatic
// transform. Localization runs 2-D MUSIC over receive-side (range, angle),
// then maps the peak back to transmit coordinates.

namespace nfisac {

// Target truth: reflection coefficient and the same physical point in both
// arrays' coordinates. Construct through from_tx/from_rx so the two stay
// consistent.
struct TargetTruth {
    cdouble beta{0.0, 0.0};
    PolarCoord tx;
    PolarCoord rx;

    static TargetTruth from_tx(cdouble beta, const PolarCoord& tx,
                               const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx);
    static TargetTruth from_rx(cdouble beta, const PolarCoord& rx,
                               const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx);
};

struct EchoBatch {
    CMatrix y;                 // N_r x L
    double noise_power = 0.0;  // sigma_w^2

    int snapshots() const { return static_cast<int>(y.cols()); }
};

// Unit-modulus QPSK symbol block, N_s x L, entries (+-1 +- j)/sqrt(2), so the
// per-snapshot symbol covariance is the identity in expectation.
CMatrix synthesize_symbols(int n_streams, int snapshots, Rng& rng);

// Receive-side focusing vector; same spherical-wave construction as the
// transmit side, evaluated with the receive array.
CVector rx_focusing(const ArrayConfig& cfg_rx, const PolarCoord& p);

// Y = beta b(rx) a(tx)^H F S + Z, Z with iid CN(0, sigma_w^2) entries.
EchoBatch synthesize_echo(const Precoder& f, const CMatrix& symbols,
                          const TargetTruth& truth, const ArrayConfig& cfg_tx,
                          const ArrayConfig& cfg_rx, double noise_power, Rng& rng);

// R_Y = Y Y^H / L.
CMatrix sample_covariance(const CMatrix& y);

// Eigenvectors of the N_r - n_sources smallest eigenvalues of R_Y.
CMatrix noise_subspace(const CMatrix& sample_cov, int n_sources);

struct MusicGrid {
    std::vector<double> ranges;  // meters, strictly increasing
    std::vector<double> angles;  // radians, strictly increasing

    static MusicGrid regular(double r_min, double r_max, double r_step,
                             double a_min, double a_max, double a_step);
    size_t cells() const { return ranges.size() * angles.size(); }
};

// MUSIC pseudo-spectrum 1 / (b^H Q_N Q_N^H b) over the grid, rows = ranges.
// Parallel version splits cells across threads, bit-identical to the serial
// reference.
RMatrix music_spectrum_serial(const CMatrix& noise_basis, const ArrayConfig& cfg_rx,
                              const MusicGrid& grid);
RMatrix music_spectrum(const CMatrix& noise_basis, const ArrayConfig& cfg_rx,
                       const MusicGrid& grid);

struct MusicEstimate {
    bool peak_found = false;
    size_t range_index = 0;
    size_t angle_index = 0;
    double peak_value = 0.0;
    PolarCoord rx;  // peak cell in receive coordinates
    PolarCoord tx;  // mapped back through the bistatic transform
};

// Argmax of the spectrum with a flatness guard: if max < 1.5 x median the
// spectrum has no usable peak and peak_found is false (coordinates still
// report the argmax cell). Optional parabolic refinement interpolates the
// peak between neighboring cells; off by default so estimate floors stay
// explainable by the grid step.
MusicEstimate music_estimate(const RMatrix& spectrum, const MusicGrid& grid,
                             const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx,
                             bool parabolic_refine = false);

// Multi-stage search plan. Stage 0 scans a strided subset of the fine
// lattice; each later stage rescans a window around the previous peak with a
// finer step. All stages draw candidate points from the same fine lattice of
// stage's step, so a noiseless on-grid target resolves to exactly its cell.
struct MusicSearchStage {
    size_t range_stride = 1;
    size_t angle_stride = 1;
};

struct MusicSearchOptions {
    MusicGrid fine;
    std::vector<MusicSearchStage> plan;  // coarse-to-fine; last stage stride 1
    bool parabolic_refine = false;

    // Default plan: angle stride from the receive-array beamwidth (half the
    // main lobe per coarse cell), range stride half a meter of fine cells.
    static MusicSearchOptions standard(const ArrayConfig& cfg_rx);
    static MusicSearchOptions standard(const ArrayConfig& cfg_rx, MusicGrid fine);
};

// Coarse-to-fine localization from the sample covariance: spectrum restricted
// to each stage's lattice, peak handed to the next stage as a window center.
// Works through the signal-subspace complement, b^H Q_N Q_N^H b
// = ||b||^2 - ||U_s^H b||^2, so a cell costs O(N_r) instead of O(N_r^2);
// the value is the same projector quadratic the spectrum functions compute.
MusicEstimate music_locate(const CMatrix& sample_cov, int n_sources,
                           const ArrayConfig& cfg_tx, const ArrayConfig& cfg_rx,
                           const MusicSearchOptions& opts);

// Energy detector at a candidate receive-side location:
// T = ||b(candidate)^H Y||^2 / (N_r sigma_w^2 L), compared to a threshold.
double detection_statistic(const EchoBatch& echo, const ArrayConfig& cfg_rx,
                           const PolarCoord& candidate);
bool detect(const EchoBatch& echo, const ArrayConfig& cfg_rx,
            const PolarCoord& candidate, double threshold);

// Threshold for a false-alarm probability: empirical (1 - p_fa) quantile of
// the statistic under noise only. The projected noise b^H Z has iid
// CN(0, N_r sigma_w^2) snapshots exactly, so the calibration draws simulate
// those projections directly instead of full N_r x L noise blocks.
double threshold_from_pfa(double p_fa, int calibration_draws, int snapshots, Rng& rng);

// Analytic cross-check: T under noise is chi^2 with 2L degrees of freedom
// scaled by 1/(2L).
double threshold_analytic(double p_fa, int snapshots);

}  // namespace nfisac

#endif
