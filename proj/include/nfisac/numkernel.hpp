#ifndef NFISAC_NUMKERNEL_HPP
#define NFISAC_NUMKERNEL_HPP

#include <Eigen/Dense>
#include <complex>

// Dense complex linear algebra used by every other module. Backed by Eigen;
// the wrappers add ordering and tie-break guarantees the solvers alone do not
// provide, so results are reproducible bit-for-bit across reruns.

namespace nfisac {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

bool is_finite(const CMatrix& m);

// Throws std::invalid_argument naming `what` if m is empty or has NaN/Inf.
void require_finite(const CMatrix& m, const char* what);

struct EigResult {
    RVector values;   // descending
    CMatrix vectors;  // columns, unit norm, phase-canonicalized
};

// Eigendecomposition of a Hermitian matrix. Input must be square and
// Hermitian within 1e-10 relative Frobenius error. Eigenvalues descending;
// each eigenvector's first entry of significant magnitude is made real
// positive, and vectors inside a degenerate eigenvalue group are ordered
// lexicographically so repeated eigenvalues still give a deterministic basis.
EigResult hermitian_eig(const CMatrix& m);

struct SvdResult {
    CMatrix u;                // rows x rows, unitary
    RVector singular_values;  // min(rows, cols), descending, nonnegative
    CMatrix v;                // cols x cols, unitary
};

// Full SVD, m = u * diag(singular_values) * v^H (diag rectangular).
SvdResult svd(const CMatrix& m);

// Moore-Penrose pseudoinverse via SVD. Singular values <= tol are treated as
// zero. Default tol = max(rows, cols) * sigma_max * machine epsilon.
CMatrix pinv(const CMatrix& m, double tol);
CMatrix pinv(const CMatrix& m);

}  // namespace nfisac

#endif
