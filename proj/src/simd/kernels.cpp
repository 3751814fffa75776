#include "finaug/simd/kernels.hpp"

#include <atomic>

#include "kernels_detail.hpp"

namespace finaug::simd {
namespace {

using detail::kernel_table;

struct selection {
    const kernel_table* table;
    backend which;
};

selection detect_best() {
    if (const kernel_table* t = detail::avx2_table()) return {t, backend::avx2};
    if (const kernel_table* t = detail::neon_table()) return {t, backend::neon};
    return {&detail::scalar_table(), backend::scalar};
}

std::atomic<const kernel_table*> g_table{nullptr};
std::atomic<backend> g_backend{backend::scalar};

const kernel_table& active() {
    const kernel_table* t = g_table.load(std::memory_order_acquire);
    if (t) return *t;
    const selection best = detect_best();
    g_backend.store(best.which, std::memory_order_relaxed);
    g_table.store(best.table, std::memory_order_release);
    return *best.table;
}

}  // namespace

backend active_backend() {
    active();  // ensure detection ran
    return g_backend.load(std::memory_order_relaxed);
}

void force_backend(backend b) {
    selection sel{&detail::scalar_table(), backend::scalar};
    if (b == backend::avx2) {
        if (const kernel_table* t = detail::avx2_table()) sel = {t, backend::avx2};
    } else if (b == backend::neon) {
        if (const kernel_table* t = detail::neon_table()) sel = {t, backend::neon};
    }
    g_backend.store(sel.which, std::memory_order_relaxed);
    g_table.store(sel.table, std::memory_order_release);
}

void reset_backend() {
    const selection best = detect_best();
    g_backend.store(best.which, std::memory_order_relaxed);
    g_table.store(best.table, std::memory_order_release);
}

std::string backend_name(backend b) {
    switch (b) {
        case backend::scalar: return "scalar";
        case backend::avx2: return "avx2";
        case backend::neon: return "neon";
    }
    return "unknown";
}

double dot(const double* x, const double* y, std::size_t n) {
    return active().dot(x, y, n);
}

double sum(const double* x, std::size_t n) { return active().sum(x, n); }

double sum_squares(const double* x, std::size_t n) {
    return active().sum_squares(x, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    active().axpy(a, x, y, n);
}

void relu(const double* x, double* y, std::size_t n) { active().relu(x, y, n); }

void gemv(const double* W, const double* x, const double* b, double* y,
          std::size_t rows, std::size_t cols) {
    active().gemv(W, x, b, y, rows, cols);
}

void gemv_transpose_acc(const double* W, const double* d, double* y,
                        std::size_t rows, std::size_t cols) {
    active().gemv_transpose_acc(W, d, y, rows, cols);
}

}  // namespace finaug::simd
