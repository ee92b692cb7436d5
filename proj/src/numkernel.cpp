#include "nfisac/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfisac {

bool is_finite(const CMatrix& m) {
    return m.allFinite();
}

void require_finite(const CMatrix& m, const char* what) {
    if (m.size() == 0)
        throw std::invalid_argument(std::string(what) + ": empty matrix");
    if (!m.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

namespace {

// Rotate each column so its first entry with |e| > thresh is real positive.
void canonicalize_phases(CMatrix& vecs) {
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
        const double colmax = vecs.col(c).cwiseAbs().maxCoeff();
        const double thresh = 1e-8 * colmax;
        for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
            const cdouble e = vecs(r, c);
            if (std::abs(e) > thresh) {
                vecs.col(c) *= std::conj(e) / std::abs(e);
                break;
            }
        }
    }
}

bool column_lex_greater(const CMatrix& m, Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const cdouble x = m(r, a), y = m(r, b);
        if (x.real() != y.real()) return x.real() > y.real();
        if (x.imag() != y.imag()) return x.imag() > y.imag();
    }
    return false;
}

}  // namespace

EigResult hermitian_eig(const CMatrix& m) {
    require_finite(m, "hermitian_eig");
    if (m.rows() != m.cols())
        throw std::invalid_argument("hermitian_eig: matrix not square");
    const double nrm = m.norm();
    const double asym = (m - m.adjoint()).norm();
    if (asym > 1e-10 * std::max(nrm, 1e-300))
        throw std::invalid_argument("hermitian_eig: matrix not Hermitian");

    const CMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermitian_eig: solver failed");

    const Eigen::Index n = m.rows();
    EigResult out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    canonicalize_phases(out.vectors);

    // Deterministic order inside degenerate groups.
    const double tie = 1e-12 * (1.0 + std::abs(out.values.cwiseAbs().maxCoeff()));
    Eigen::Index lo = 0;
    while (lo < n) {
        Eigen::Index hi = lo + 1;
        while (hi < n && out.values(lo) - out.values(hi) <= tie) ++hi;
        if (hi - lo > 1) {
            std::vector<Eigen::Index> idx(static_cast<size_t>(hi - lo));
            std::iota(idx.begin(), idx.end(), lo);
            std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
                return column_lex_greater(out.vectors, a, b);
            });
            CMatrix perm(n, hi - lo);
            RVector vals(hi - lo);
            for (Eigen::Index k = 0; k < hi - lo; ++k) {
                perm.col(k) = out.vectors.col(idx[static_cast<size_t>(k)]);
                vals(k) = out.values(idx[static_cast<size_t>(k)]);
            }
            out.vectors.middleCols(lo, hi - lo) = perm;
            out.values.segment(lo, hi - lo) = vals;
        }
        lo = hi;
    }
    return out;
}

SvdResult svd(const CMatrix& m) {
    require_finite(m, "svd");
    Eigen::JacobiSVD<CMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdResult out;
    out.u = solver.matrixU();
    out.v = solver.matrixV();
    out.singular_values = solver.singularValues();
    return out;
}

CMatrix pinv(const CMatrix& m, double tol) {
    const SvdResult s = svd(m);
    const Eigen::Index k = s.singular_values.size();
    CMatrix result = CMatrix::Zero(m.cols(), m.rows());
    for (Eigen::Index i = 0; i < k; ++i) {
        const double sv = s.singular_values(i);
        if (sv > tol)
            result.noalias() += (1.0 / sv) * s.v.col(i) * s.u.col(i).adjoint();
    }
    return result;
}

CMatrix pinv(const CMatrix& m) {
    require_finite(m, "pinv");
    const double smax = m.size() ? svd(m).singular_values(0) : 0.0;
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * smax *
                       std::numeric_limits<double>::epsilon();
    return pinv(m, tol);
}

}  // namespace nfisac
