#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Small dense linear algebra for the multi-asset mean-variance solve.
// Dimensions stay tiny (<= ~50), so a hand-rolled Cholesky keeps the
// dependency surface flat and the determinism story simple.

namespace finaug::linalg {

// Row-major dense matrix.
struct matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    matrix() = default;
    matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    static matrix identity(std::size_t n);
};

bool is_symmetric(const matrix& A, double tol = 1e-12);

// Cholesky factor L (lower triangular, A = L L^T).  Throws
// not_psd when a pivot is non-positive.
matrix cholesky(const matrix& A);

// Solve A x = b given the Cholesky factor of A.
std::vector<double> cholesky_solve(const matrix& L, std::span<const double> b);

// Convenience: factor + solve.  Throws dimension_mismatch / not_psd.
std::vector<double> solve_spd(const matrix& A, std::span<const double> b);

// x^T A y (independent of the solve path; used as a cross-check oracle).
double quadratic_form(std::span<const double> x, const matrix& A,
                      std::span<const double> y);

// Largest eigenvalue magnitude of a symmetric matrix by power iteration.
double spectral_radius(const matrix& A, std::size_t iters = 200);

// Condition number estimate lambda_max / lambda_min for SPD A, using power
// iteration on A and on A^{-1} (via the supplied Cholesky factor).
double condition_spd(const matrix& A, const matrix& L, std::size_t iters = 200);

// Validate that A is symmetric positive semidefinite within `tol`
// (A + tol*I must admit a Cholesky factorization).  Throws not_psd.
void check_psd(const matrix& A, double tol = 1e-10);

}  // namespace finaug::linalg
