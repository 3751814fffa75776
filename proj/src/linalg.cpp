#include "finaug/linalg.hpp"

#include <cmath>
#include <limits>

#include "finaug/errors.hpp"
#include "finaug/simd/kernels.hpp"

namespace finaug::linalg {

matrix matrix::identity(std::size_t n) {
    matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I.at(i, i) = 1.0;
    return I;
}

bool is_symmetric(const matrix& A, double tol) {
    if (A.rows != A.cols) return false;
    for (std::size_t r = 0; r < A.rows; ++r)
        for (std::size_t c = r + 1; c < A.cols; ++c)
            if (std::abs(A.at(r, c) - A.at(c, r)) > tol) return false;
    return true;
}

matrix cholesky(const matrix& A) {
    if (A.rows != A.cols)
        throw dimension_mismatch("cholesky requires a square matrix");
    const std::size_t n = A.rows;
    matrix L(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = A.at(j, j) - simd::dot(&L.a[j * n], &L.a[j * n], j);
        if (!(diag > 0.0))
            throw not_psd("pivot " + std::to_string(j) +
                          " non-positive in Cholesky factorization");
        const double ljj = std::sqrt(diag);
        L.at(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            const double off =
                A.at(i, j) - simd::dot(&L.a[i * n], &L.a[j * n], j);
            L.at(i, j) = off / ljj;
        }
    }
    return L;
}

std::vector<double> cholesky_solve(const matrix& L, std::span<const double> b) {
    const std::size_t n = L.rows;
    if (b.size() != n)
        throw dimension_mismatch("right-hand side length does not match matrix");
    // Forward substitution L y = b.
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = (b[i] - simd::dot(&L.a[i * n], y.data(), i)) / L.at(i, i);
    // Back substitution L^T x = y.
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= L.at(j, ii) * x[j];
        x[ii] = s / L.at(ii, ii);
    }
    return x;
}

std::vector<double> solve_spd(const matrix& A, std::span<const double> b) {
    return cholesky_solve(cholesky(A), b);
}

double quadratic_form(std::span<const double> x, const matrix& A,
                      std::span<const double> y) {
    if (x.size() != A.rows || y.size() != A.cols)
        throw dimension_mismatch("quadratic form dimensions do not agree");
    // Deliberately plain row-by-row arithmetic: this is the independent
    // cross-check route, kept free of the kernel layer.
    double total = 0.0;
    for (std::size_t r = 0; r < A.rows; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < A.cols; ++c) row += A.at(r, c) * y[c];
        total += x[r] * row;
    }
    return total;
}

namespace {

double normalize(std::vector<double>& v) {
    double norm2 = simd::sum_squares(v.data(), v.size());
    const double norm = std::sqrt(norm2);
    if (norm > 0.0)
        for (double& e : v) e /= norm;
    return norm;
}

}  // namespace

double spectral_radius(const matrix& A, std::size_t iters) {
    const std::size_t n = A.rows;
    std::vector<double> v(n, 1.0), w(n);
    normalize(v);
    double eig = 0.0;
    for (std::size_t k = 0; k < iters; ++k) {
        simd::gemv(A.a.data(), v.data(), nullptr, w.data(), n, n);
        eig = normalize(w);
        v.swap(w);
    }
    return eig;
}

double condition_spd(const matrix& A, const matrix& L, std::size_t iters) {
    const std::size_t n = A.rows;
    const double lambda_max = spectral_radius(A, iters);
    // Power iteration on A^{-1} through repeated solves.
    std::vector<double> v(n, 1.0);
    normalize(v);
    double inv_eig = 0.0;
    for (std::size_t k = 0; k < iters; ++k) {
        std::vector<double> w = cholesky_solve(L, v);
        inv_eig = normalize(w);
        v.swap(w);
    }
    if (inv_eig <= 0.0) return std::numeric_limits<double>::infinity();
    const double lambda_min = 1.0 / inv_eig;
    return lambda_max / lambda_min;
}

void check_psd(const matrix& A, double tol) {
    if (!is_symmetric(A, tol))
        throw not_psd("matrix is not symmetric within tolerance");
    matrix shifted = A;
    for (std::size_t i = 0; i < A.rows; ++i) shifted.at(i, i) += tol;
    try {
        cholesky(shifted);
    } catch (const not_psd&) {
        throw not_psd("matrix has an eigenvalue below -" + std::to_string(tol));
    }
}

}  // namespace finaug::linalg
