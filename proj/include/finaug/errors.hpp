#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finaug {

// Base class for all library errors so callers can catch the whole family.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- data loading / series construction ---------------------------------

struct parse_error : error {
    explicit parse_error(const std::string& what, std::size_t row = 0)
        : error(what), row(row) {}
    std::size_t row;  // 1-based data row when applicable, 0 otherwise
};

struct missing_column : error {
    explicit missing_column(const std::string& name)
        : error("required column not found: " + name) {}
};

// A loaded price violated the strict-positivity invariant.  `row` is the
// 1-based data row (header excluded) when raised by the CSV loader, or the
// series index when raised by validation.
struct non_positive_price : error {
    non_positive_price(std::size_t row, double value)
        : error("price at row " + std::to_string(row) +
                " must be strictly positive, got " + std::to_string(value)),
          row(row), value(value) {}
    std::size_t row;
    double value;
};

struct non_finite_value : error {
    explicit non_finite_value(const std::string& where)
        : error("non-finite value in " + where) {}
};

struct series_too_short : error {
    explicit series_too_short(const std::string& what) : error(what) {}
};

struct length_mismatch : error {
    explicit length_mismatch(const std::string& what) : error(what) {}
};

struct size_mismatch : error {
    explicit size_mismatch(const std::string& what) : error(what) {}
};

struct window_too_large : error {
    window_too_large(std::size_t window, std::size_t len)
        : error("window " + std::to_string(window) +
                " exceeds series length " + std::to_string(len)) {}
};

// --- parameter validation ------------------------------------------------

struct invalid_parameter : error {
    using error::error;
};

// The optimal-strength formulas divide by the drift; they refuse r <= 0.
struct zero_drift : invalid_parameter {
    zero_drift() : invalid_parameter("drift must be strictly positive") {}
};

struct zero_volatility : invalid_parameter {
    zero_volatility() : invalid_parameter("volatility must be strictly positive") {}
};

// --- generation ------------------------------------------------------------

// A simulated price crossed zero.  Raised instead of clamping: a clamped
// path would silently bias every utility estimate computed from it.
struct non_positive_price_generated : error {
    non_positive_price_generated(std::size_t step, double value)
        : error("generated price at step " + std::to_string(step) +
                " is non-positive (" + std::to_string(value) +
                "); refusing to clamp"),
          step(step), value(value) {}
    std::size_t step;
    double value;
};

// --- linear algebra -------------------------------------------------------

struct dimension_mismatch : error {
    explicit dimension_mismatch(const std::string& what) : error(what) {}
};

struct not_psd : error {
    explicit not_psd(const std::string& what) : error(what) {}
};

// Covariance matrix unusable for the mean-variance solve: not positive
// definite, or condition number beyond the safety threshold.
struct singular_covariance : error {
    explicit singular_covariance(const std::string& what) : error(what) {}
};

// --- training -------------------------------------------------------------

struct empty_batch : error {
    empty_batch() : error("training batch is empty") {}
    explicit empty_batch(const std::string& what) : error(what) {}
};

struct non_finite_loss : error {
    explicit non_finite_loss(std::size_t step)
        : error("loss became non-finite at step " + std::to_string(step)),
          step(step) {}
    std::size_t step;
};

struct checkpoint_error : error {
    using error::error;
};

// --- evaluation -----------------------------------------------------------

// Sharpe ratio is undefined when every per-step wealth return is identical.
struct zero_dispersion : error {
    zero_dispersion()
        : error("per-step returns have zero dispersion; Sharpe ratio undefined") {}
    explicit zero_dispersion(const std::string& what) : error(what) {}
};

// Frontier slope is undefined when no strategy beats the risk-free rate.
struct no_excess_return : error {
    no_excess_return()
        : error("no strategy exceeds the risk-free return; slope undefined") {}
    explicit no_excess_return(const std::string& what) : error(what) {}
};

}  // namespace finaug
