#include "kernels_detail.hpp"

// AVX2 kernels.  Compiled unconditionally on x86-64 via the target attribute
// and selected at runtime only when the CPU reports AVX2, so the binary still
// runs on older machines.  Accumulation order matches the scalar reference
// exactly: one 4-lane vector accumulator, explicit mul then add (no FMA),
// lane reduction (l0+l1)+(l2+l3), sequential scalar tail.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace finaug::simd::detail {
namespace {

#define FINAUG_AVX2 __attribute__((target("avx2")))

FINAUG_AVX2 inline double reduce_lanes(__m256d acc) {
    const __m128d lo = _mm256_castpd256_pd128(acc);     // lanes 0,1
    const __m128d hi = _mm256_extractf128_pd(acc, 1);   // lanes 2,3
    const double l0 = _mm_cvtsd_f64(lo);
    const double l1 = _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
    const double l2 = _mm_cvtsd_f64(hi);
    const double l3 = _mm_cvtsd_f64(_mm_unpackhi_pd(hi, hi));
    return (l0 + l1) + (l2 + l3);
}

FINAUG_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t nb = n - n % 4;
    for (std::size_t i = 0; i < nb; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(xv, yv));
    }
    double s = reduce_lanes(acc);
    for (std::size_t i = nb; i < n; ++i) s += x[i] * y[i];
    return s;
}

FINAUG_AVX2 double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t nb = n - n % 4;
    for (std::size_t i = 0; i < nb; i += 4)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = reduce_lanes(acc);
    for (std::size_t i = nb; i < n; ++i) s += x[i];
    return s;
}

FINAUG_AVX2 double sum_squares_avx2(const double* x, std::size_t n) {
    return dot_avx2(x, x, n);
}

FINAUG_AVX2 void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    const std::size_t nb = n - n % 4;
    for (std::size_t i = 0; i < nb; i += 4) {
        const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (std::size_t i = nb; i < n; ++i) y[i] = y[i] + a * x[i];
}

FINAUG_AVX2 void relu_avx2(const double* x, double* y, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const std::size_t nb = n - n % 4;
    for (std::size_t i = 0; i < nb; i += 4)
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (std::size_t i = nb; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

FINAUG_AVX2 void gemv_avx2(const double* W, const double* x, const double* b,
                           double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double acc = dot_avx2(W + r * cols, x, cols);
        y[r] = b ? acc + b[r] : acc;
    }
}

FINAUG_AVX2 void gemv_transpose_acc_avx2(const double* W, const double* d,
                                         double* y, std::size_t rows,
                                         std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy_avx2(d[r], W + r * cols, y, cols);
}

#undef FINAUG_AVX2

}  // namespace

const kernel_table* avx2_table() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const kernel_table table{
        dot_avx2,  sum_avx2,  sum_squares_avx2, axpy_avx2,
        relu_avx2, gemv_avx2, gemv_transpose_acc_avx2,
    };
    return &table;
}

}  // namespace finaug::simd::detail

#else

namespace finaug::simd::detail {
const kernel_table* avx2_table() { return nullptr; }
}  // namespace finaug::simd::detail

#endif
