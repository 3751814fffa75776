#pragma once

#include <cstddef>

// Private dispatch plumbing shared by the kernel translation units.
// Each backend fills one kernel_table; kernels.cpp picks the active one.

namespace finaug::simd::detail {

struct kernel_table {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sum_squares)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*relu)(const double*, double*, std::size_t);
    void (*gemv)(const double*, const double*, const double*, double*,
                 std::size_t, std::size_t);
    void (*gemv_transpose_acc)(const double*, const double*, double*,
                               std::size_t, std::size_t);
};

const kernel_table& scalar_table();

// Return nullptr when the backend is not compiled in or the CPU lacks it.
const kernel_table* avx2_table();
const kernel_table* neon_table();

}  // namespace finaug::simd::detail
