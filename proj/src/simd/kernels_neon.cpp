#include "kernels_detail.hpp"

// NEON kernels (aarch64).  Two float64x2 accumulators stand in for the four
// scalar lanes — acc01 holds lanes (0,1), acc23 holds lanes (2,3) — so the
// per-lane add sequence and the (l0+l1)+(l2+l3) reduction match the scalar
// reference bit for bit.  vmulq/vaddq stay unfused, mirroring the mul+add
// split elsewhere.

#if defined(__ARM_NEON) && defined(__aarch64__)

#include <arm_neon.h>

namespace finaug::simd::detail {
namespace {

inline double reduce_lanes(float64x2_t acc01, float64x2_t acc23) {
    const double l0 = vgetq_lane_f64(acc01, 0);
    const double l1 = vgetq_lane_f64(acc01, 1);
    const double l2 = vgetq_lane_f64(acc23, 0);
    const double l3 = vgetq_lane_f64(acc23, 1);
    return (l0 + l1) + (l2 + l3);
}

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    const std::size_t nb = n - n % 4;
    for (std::size_t i = 0; i < nb; i += 4) {
        acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
        acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
    }
    double s = reduce_lanes(acc01, acc23);
    for (std::size_t i = nb; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    const std::size_t nb = n - n % 4;
    for (std::size_t i = 0; i < nb; i += 4) {
        acc01 = vaddq_f64(acc01, vld1q_f64(x + i));
        acc23 = vaddq_f64(acc23, vld1q_f64(x + i + 2));
    }
    double s = reduce_lanes(acc01, acc23);
    for (std::size_t i = nb; i < n; ++i) s += x[i];
    return s;
}

double sum_squares_neon(const double* x, std::size_t n) {
    return dot_neon(x, x, n);
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    const std::size_t nb = n - n % 2;
    for (std::size_t i = 0; i < nb; i += 2) {
        const float64x2_t prod = vmulq_f64(av, vld1q_f64(x + i));
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
    }
    for (std::size_t i = nb; i < n; ++i) y[i] = y[i] + a * x[i];
}

void relu_neon(const double* x, double* y, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    const std::size_t nb = n - n % 2;
    for (std::size_t i = 0; i < nb; i += 2)
        vst1q_f64(y + i, vmaxq_f64(vld1q_f64(x + i), zero));
    for (std::size_t i = nb; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void gemv_neon(const double* W, const double* x, const double* b,
               double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double acc = dot_neon(W + r * cols, x, cols);
        y[r] = b ? acc + b[r] : acc;
    }
}

void gemv_transpose_acc_neon(const double* W, const double* d,
                             double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy_neon(d[r], W + r * cols, y, cols);
}

}  // namespace

const kernel_table* neon_table() {
    static const kernel_table table{
        dot_neon,  sum_neon,  sum_squares_neon, axpy_neon,
        relu_neon, gemv_neon, gemv_transpose_acc_neon,
    };
    return &table;
}

}  // namespace finaug::simd::detail

#else

namespace finaug::simd::detail {
const kernel_table* neon_table() { return nullptr; }
}  // namespace finaug::simd::detail

#endif
