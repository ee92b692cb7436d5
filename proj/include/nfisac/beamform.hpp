#ifndef NFISAC_BEAMFORM_HPP
#define NFISAC_BEAMFORM_HPP

#include <vector>

#include "nfisac/channel.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/numkernel.hpp"

// Transmit precoder designs. A precoder is N_t x N_s (one column per stream,
// N_s = K users here) and always carries the full power budget:
// ||F||_F^2 = P_t. The dual-function designs blend a zero-forcing
// communication precoder with a single focused sensing beam, controlled by a
// weight eta in [0, 1] (eta = 1 reproduces the communication precoder,
// eta = 0 the sensing beam).

namespace nfisac {

struct Precoder {
    CMatrix entries;            // N_t x N_s
    double power_budget = 0.0;  // P_t, watts

    int antennas() const { return static_cast<int>(entries.rows()); }
    int streams() const { return static_cast<int>(entries.cols()); }
};

// Zero-forcing: F = H^H (H H^H)^{-1}, scaled to the power budget. Throws if
// H is rank deficient; the message names the dependent row indices.
Precoder zf_precoder(const ChannelMatrix& design, double power_budget);

// Single focused beam at the target, F = sqrt(P_t) a(target)/||a||. The
// model picks spherical (near) or planar (far) focusing.
Precoder radar_precoder(const ArrayConfig& cfg, const PolarCoord& target,
                        double power_budget, ChannelModel model);

// Unit row F_u (1 x N_s) minimizing ||F_com - F_rad F_u||_F over
// F_u F_u^H = 1; the orthogonal-Procrustes solution, which for a single
// sensing beam reduces to normalizing F_rad^H F_com. Zero overlap falls back
// to e_1.
Eigen::RowVectorXcd opp_aux(const Precoder& radar, const Precoder& comm);

// One-shot least-squares trade-off: F proportional to
// eta F_com + (1 - eta) F_rad F_u, renormalized to the power budget. The
// weighted stack this collapses from has orthonormal-scaled blocks, so the
// collapsed form is exact, and on the power sphere the renormalized solution
// is the constrained optimum for the given F_u.
Precoder tradeoff_ls(const Precoder& comm, const Precoder& radar, double eta);

// Same solution computed through the explicit stacked pseudoinverse,
// [sqrt(eta) I; sqrt(1-eta) I]^+ [sqrt(eta) F_com; sqrt(1-eta) F_rad F_u].
// Slower; kept so tests can cross-validate the collapsed form.
Precoder tradeoff_ls_stacked(const Precoder& comm, const Precoder& radar, double eta);

struct AmResult {
    Precoder precoder;
    Eigen::RowVectorXcd aux;
    std::vector<double> objective_trace;  // objective after each outer step
    bool converged = false;
};

// Alternating minimization of
// eta ||F - F_com||^2 + (1 - eta) ||F - F_rad F_u||^2 over F (power sphere)
// and F_u (unit row), from F_u = ones/sqrt(N_s). Both block updates are exact
// minimizers, so the objective trace never increases. Convergence is linear
// and can be slow, so the stop extrapolates the geometric tail: iteration
// ends when the estimated remaining decrease falls to epsilon, or when the
// objective stops changing, or at max_iterations.
AmResult tradeoff_am(const Precoder& comm, const Precoder& radar, double eta,
                     double epsilon = 1e-6, int max_iterations = 20000);

// eta ||F - F_com||_F^2 + (1 - eta) ||F - F_rad F_u||_F^2.
double tradeoff_objective(const CMatrix& f, const Precoder& comm,
                          const Precoder& radar, const Eigen::RowVectorXcd& aux,
                          double eta);

// Transmit covariance R_x = F F^H (Hermitian, PSD, rank <= N_s,
// trace = P_t).
CMatrix tx_covariance(const Precoder& f);

// Far-field transmit beampattern a(theta)^H R_x a(theta) on an angle grid,
// and its near-field counterpart on a range x angle grid. The parallel
// versions split the grid across threads; each cell is computed exactly as in
// the serial reference, so results are bit-identical.
RVector beampattern_far_serial(const CMatrix& rx_cov, const ArrayConfig& cfg,
                               const std::vector<double>& angles);
RVector beampattern_far(const CMatrix& rx_cov, const ArrayConfig& cfg,
                        const std::vector<double>& angles);
RMatrix beampattern_near_serial(const CMatrix& rx_cov, const ArrayConfig& cfg,
                                const std::vector<double>& ranges,
                                const std::vector<double>& angles);
RMatrix beampattern_near(const CMatrix& rx_cov, const ArrayConfig& cfg,
                         const std::vector<double>& ranges,
                         const std::vector<double>& angles);

// Beampattern value at a single point, a(p)^H R_x a(p).
double beampattern_at(const CMatrix& rx_cov, const ArrayConfig& cfg,
                      const PolarCoord& p);

}  // namespace nfisac

#endif
