#pragma once

#include <cstddef>
#include <string>

// Numeric kernels used by the training loop and the Monte Carlo evaluators.
//
// Every kernel exists in a scalar reference version and (where the hardware
// supports it) a vectorized version.  The two are bit-identical by
// construction, not merely close: both use the same blocked accumulation
// order (4 independent partial sums over blocks of 4, reduced as
// (s0+s1)+(s2+s3), then a sequential tail), and both compute multiply and
// add as separate operations (no FMA).  The kernel translation units are
// compiled with -ffp-contract=off so the compiler cannot fuse the scalar
// path either.  This keeps results reproducible across machines with and
// without vector units, which the determinism contracts elsewhere rely on.

namespace finaug::simd {

enum class backend {
    scalar,   // portable reference path
    avx2,     // x86-64 AVX2 (4 doubles per vector)
    neon,     // aarch64 NEON (2 doubles per vector, paired to mirror the 4-lane order)
};

// Backend actually used by the kernels right now.
backend active_backend();

// Force a specific backend.  Requesting a backend the CPU does not support
// falls back to scalar.  Intended for equivalence tests and benchmarking.
void force_backend(backend b);

// Undo force_backend: re-detect the best available backend.
void reset_backend();

std::string backend_name(backend b);

// --- reductions ------------------------------------------------------------

// sum_i x[i]*y[i]
double dot(const double* x, const double* y, std::size_t n);

// sum_i x[i]
double sum(const double* x, std::size_t n);

// sum_i x[i]^2
double sum_squares(const double* x, std::size_t n);

// --- elementwise -----------------------------------------------------------

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// y[i] = max(x[i], 0)
void relu(const double* x, double* y, std::size_t n);

// --- matrix-vector ---------------------------------------------------------

// y[r] = sum_c W[r*cols + c] * x[c] + b[r]        (W row-major, rows x cols)
void gemv(const double* W, const double* x, const double* b,
          double* y, std::size_t rows, std::size_t cols);

// y[c] += sum_r W[r*cols + c] * d[r]   i.e.  y += W^T d, accumulated row by
// row as axpy(d[r], W[r,:], y) so the backends agree bitwise.
void gemv_transpose_acc(const double* W, const double* d,
                        double* y, std::size_t rows, std::size_t cols);

}  // namespace finaug::simd
