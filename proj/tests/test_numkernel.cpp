#include "doctest.h"

#include <Eigen/Dense>
#include <complex>

#include "nfisac/numkernel.hpp"
#include "nfisac/rng.hpp"

using namespace nfisac;

namespace {

CMatrix random_complex(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.cnormal(1.0);
    return m;
}

// Hermitian matrix with prescribed eigenvalues, eigenbasis from a QR of a
// random matrix so it is unitary to machine precision.
CMatrix hermitian_with_spectrum(const RVector& values, std::uint64_t seed) {
    const int n = static_cast<int>(values.size());
    Eigen::HouseholderQR<CMatrix> qr(random_complex(n, n, seed));
    CMatrix q = qr.householderQ();
    CMatrix m = q * values.asDiagonal() * q.adjoint();
    return ((m + m.adjoint()) / 2.0).eval();
}

}  // namespace

TEST_CASE("hermitian_eig recovers a prescribed spectrum in descending order") {
    RVector values(5);
    values << -2.0, 7.5, 0.0, 3.25, 7.5;
    const CMatrix m = hermitian_with_spectrum(values, 11);
    const EigResult eig = hermitian_eig(m);

    std::sort(values.begin(), values.end(), std::greater<double>());
    for (int i = 0; i < 5; ++i) CHECK(eig.values(i) == doctest::Approx(values(i)).epsilon(1e-12));
    for (int i = 1; i < 5; ++i) CHECK(eig.values(i) <= eig.values(i - 1));

    const CMatrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.adjoint();
    CHECK((rebuilt - m).norm() <= 1e-10 * m.norm());
    CHECK((eig.vectors.adjoint() * eig.vectors - CMatrix::Identity(5, 5)).norm() <= 1e-10);
}

TEST_CASE("hermitian_eig eigenvectors have a canonical phase") {
    const CMatrix m = hermitian_with_spectrum(RVector::LinSpaced(4, 1.0, 4.0), 3);
    const EigResult eig = hermitian_eig(m);
    for (int c = 0; c < 4; ++c) {
        // First entry of significant magnitude is real and positive.
        int lead = 0;
        while (std::abs(eig.vectors(lead, c)) < 1e-8) ++lead;
        CHECK(eig.vectors(lead, c).imag() == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(eig.vectors(lead, c).real() > 0.0);
    }
}

TEST_CASE("hermitian_eig is deterministic on a degenerate eigenvalue group") {
    RVector values(4);
    values << 3.0, 2.0, 2.0, 1.0;  // repeated middle pair
    const CMatrix m = hermitian_with_spectrum(values, 21);
    const EigResult a = hermitian_eig(m);
    const EigResult b = hermitian_eig(m);
    CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    const CMatrix rebuilt = a.vectors * a.values.asDiagonal() * a.vectors.adjoint();
    CHECK((rebuilt - m).norm() <= 1e-10 * m.norm());
}

TEST_CASE("hermitian_eig rejects bad input") {
    CHECK_THROWS_AS(hermitian_eig(CMatrix()), std::invalid_argument);
    CHECK_THROWS_AS(hermitian_eig(random_complex(3, 4, 5)), std::invalid_argument);

    CMatrix skewed = random_complex(4, 4, 6);  // not Hermitian
    CHECK_THROWS_AS(hermitian_eig(skewed), std::invalid_argument);

    CMatrix poisoned = hermitian_with_spectrum(RVector::Ones(3), 7);
    poisoned(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(hermitian_eig(poisoned), std::invalid_argument);
}

TEST_CASE("svd reconstructs the matrix with unitary factors") {
    const CMatrix m = random_complex(6, 4, 13);
    const SvdResult s = svd(m);

    CHECK(s.u.rows() == 6);
    CHECK(s.v.rows() == 4);
    CHECK(s.singular_values.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(s.singular_values(i) >= 0.0);
        if (i) CHECK(s.singular_values(i) <= s.singular_values(i - 1));
    }
    CHECK((s.u.adjoint() * s.u - CMatrix::Identity(6, 6)).norm() <= 1e-10);
    CHECK((s.v.adjoint() * s.v - CMatrix::Identity(4, 4)).norm() <= 1e-10);

    CMatrix sigma = CMatrix::Zero(6, 4);
    sigma.diagonal() = s.singular_values.cast<cdouble>();
    CHECK((s.u * sigma * s.v.adjoint() - m).norm() <= 1e-10 * m.norm());
}

TEST_CASE("pinv satisfies the Moore-Penrose conditions") {
    for (auto [rows, cols] : {std::pair{5, 3}, std::pair{3, 5}, std::pair{4, 4}}) {
        const CMatrix m = random_complex(rows, cols, 100 + rows * 10 + cols);
        const CMatrix p = pinv(m);
        const double scale = m.norm();
        CHECK((m * p * m - m).norm() <= 1e-10 * scale);
        CHECK((p * m * p - p).norm() <= 1e-10 * p.norm());
        CHECK(((m * p).adjoint() - m * p).norm() <= 1e-10);
        CHECK(((p * m).adjoint() - p * m).norm() <= 1e-10);
    }
}

TEST_CASE("pinv handles rank deficiency") {
    CMatrix m = random_complex(6, 2, 31);
    CMatrix wide(6, 4);
    wide << m, m;  // rank 2 by construction
    const CMatrix p = pinv(wide);
    CHECK((wide * p * wide - wide).norm() <= 1e-9 * wide.norm());

    // Inverting a rank-1 outer product reproduces the scaled dyad transpose.
    CVector u = random_complex(5, 1, 32);
    CMatrix dyad = u * u.adjoint();
    const CMatrix pd = pinv(dyad);
    CHECK((pd - dyad / (u.squaredNorm() * u.squaredNorm())).norm() <= 1e-10);
}

TEST_CASE("require_finite names the offending argument") {
    CMatrix bad = random_complex(2, 2, 41);
    bad(0, 1) = std::numeric_limits<double>::infinity();
    try {
        require_finite(bad, "echo block");
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("echo block") != std::string::npos);
    }
    CHECK_THROWS_AS(require_finite(CMatrix(), "empty thing"), std::invalid_argument);
}
