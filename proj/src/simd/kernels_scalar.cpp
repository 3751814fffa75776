#include "kernels_detail.hpp"

// Scalar reference kernels.  These deliberately mimic the vector layout:
// four independent accumulators walk blocks of four, partial sums reduce as
// (s0+s1)+(s2+s3), and the remainder is folded in sequentially.  Multiplies
// and adds stay separate operations (this TU builds with -ffp-contract=off),
// so the AVX2/NEON paths can reproduce every intermediate rounding step.

namespace finaug::simd::detail {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t nb = n - n % 4;
    for (std::size_t i = 0; i < nb; i += 4) {
        s0 += x[i] * y[i];
        s1 += x[i + 1] * y[i + 1];
        s2 += x[i + 2] * y[i + 2];
        s3 += x[i + 3] * y[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (std::size_t i = nb; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_scalar(const double* x, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t nb = n - n % 4;
    for (std::size_t i = 0; i < nb; i += 4) {
        s0 += x[i];
        s1 += x[i + 1];
        s2 += x[i + 2];
        s3 += x[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (std::size_t i = nb; i < n; ++i) s += x[i];
    return s;
}

double sum_squares_scalar(const double* x, std::size_t n) {
    return dot_scalar(x, x, n);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void relu_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void gemv_scalar(const double* W, const double* x, const double* b,
                 double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double acc = dot_scalar(W + r * cols, x, cols);
        y[r] = b ? acc + b[r] : acc;
    }
}

void gemv_transpose_acc_scalar(const double* W, const double* d,
                               double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy_scalar(d[r], W + r * cols, y, cols);
}

}  // namespace

const kernel_table& scalar_table() {
    static const kernel_table table{
        dot_scalar,  sum_scalar,  sum_squares_scalar, axpy_scalar,
        relu_scalar, gemv_scalar, gemv_transpose_acc_scalar,
    };
    return table;
}

}  // namespace finaug::simd::detail
