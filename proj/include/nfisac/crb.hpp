#ifndef NFISAC_CRB_HPP
#define NFISAC_CRB_HPP

#include "nfisac/geometry.hpp"
#include "nfisac/numkernel.hpp"
#include "nfisac/sensing.hpp"

// Fisher information and Cramer-Rao bounds for the bistatic localization
// problem. Unknowns are the transmit-side target coordinates (r_t, theta_t)
// and the complex reflection coefficient (2 real nuisance parameters). The
// receive-side focusing vector depends on (r_t, theta_t) only through the
// bistatic transform, so every derivative here chains through it.

namespace nfisac {

// G = b(rx) a(tx)^H, N_r x N_t.
CMatrix g_matrix(const TargetTruth& truth, const ArrayConfig& cfg_tx,
                 const ArrayConfig& cfg_rx);

struct GDerivatives {
    CMatrix d_range;  // dG/dr_t
    CMatrix d_angle;  // dG/dtheta_t
};

enum class DerivMode { kAnalytic, kFiniteDifference };

// dG/dr_t and dG/dtheta_t. Analytic mode differentiates the element-distance
// expressions and the bistatic transform in closed form; finite-difference
// mode central-differences g_matrix with steps h_r = 1e-4 r_t and
// h_theta = 1e-6 rad, kept as an independent cross-check.
GDerivatives g_derivatives(const TargetTruth& truth, const ArrayConfig& cfg_tx,
                           const ArrayConfig& cfg_rx,
                           DerivMode mode = DerivMode::kAnalytic);

struct FimBlocks {
    RMatrix phi_phi;    // 2x2, (r_t, theta_t)
    RMatrix phi_beta;   // 2x2, against (Re beta, Im beta)
    RMatrix beta_beta;  // 2x2
};

// Closed-form FIM blocks for the echo model with transmit covariance R_x and
// L snapshots:
//   [J_pp]_{lp} = (2 |beta|^2 L / sigma_w^2) Re tr(Gd_p R_x Gd_l^H)
//   J_pb = (2 L / sigma_w^2) Re{ [beta* t_1; beta* t_2] [1, j] },
//          t_l = tr(G R_x Gd_l^H)
//   J_bb = (2 L / sigma_w^2) tr(G R_x G^H) I_2.
FimBlocks fim_blocks(const CMatrix& g, const GDerivatives& dg, const CMatrix& rx_cov,
                     cdouble beta, int snapshots, double noise_power);

struct CrbReport {
    RMatrix matrix = RMatrix::Zero(2, 2);  // CRB of (r_t, theta_t)
    double crb_range = 0.0;                // m^2
    double crb_angle = 0.0;                // rad^2
    double rcrb_range = 0.0;               // m
    double rcrb_angle = 0.0;               // rad
    double snr_r = 0.0;
    bool infinite = false;  // set when the information matrix is singular
};

// Schur complement of the nuisance block,
// CRB = (J_pp - J_pb J_bb^{-1} J_pb^T)^+.
CrbReport crb_matrix(const FimBlocks& blocks, cdouble beta, int snapshots,
                     double noise_power, double power_budget);

// Same bound in the explicit trace form: the prefactor
// P_t tr(G R_x G^H) / (2 SNR_r) times the pseudoinverse of the 2x2 matrix
// with entries tr(Gd_i R_x Gd_i^H) tr(G R_x G^H) - |tr(G R_x Gd_i^H)|^2 on
// the diagonal and Re{tr(Gd_2 R_x Gd_1^H) tr(G R_x G^H)
// - tr(G R_x Gd_1^H) tr(G R_x Gd_2^H)*} off it. Equals the Schur route.
CrbReport crb_matrix_explicit(const CMatrix& g, const GDerivatives& dg,
                              const CMatrix& rx_cov, cdouble beta, int snapshots,
                              double noise_power);

// Scalar bounds with the other coordinate known (the corresponding derivative
// drops out of the information matrix).
double crb_angle_known_range(const CMatrix& g, const GDerivatives& dg,
                             const CMatrix& rx_cov, cdouble beta, int snapshots,
                             double noise_power);
double crb_range_known_angle(const CMatrix& g, const GDerivatives& dg,
                             const CMatrix& rx_cov, cdouble beta, int snapshots,
                             double noise_power);

// Receive sensing SNR, |beta|^2 L P_t / sigma_w^2.
double snr_r(cdouble beta, int snapshots, double power_budget, double noise_power);

}  // namespace nfisac

#endif
