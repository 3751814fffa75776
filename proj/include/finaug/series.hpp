#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

// Price/return containers and the windowing step that turns a series into
// supervised (input window, next value) pairs for model fitting.

namespace finaug {

// A single asset's price path S_0, S_1, ..., S_T.  Prices are strictly
// positive and finite; validate() enforces that and every factory calls it.
struct price_series {
    std::vector<double> prices;
    std::string label;

    std::size_t size() const { return prices.size(); }
    void validate() const;  // throws non_positive_price / non_finite_value / series_too_short
};

// Per-step relative returns r_t = (S_{t+1} - S_t) / S_t, one shorter than
// the price series that produced them.
struct return_series {
    std::vector<double> returns;

    std::size_t size() const { return returns.size(); }
    void validate() const;  // throws non_finite_value
};

// Supervised windows: input = L consecutive values, target = the next one.
// Inputs are stored flat (row-major, n x L).  target_index[i] is the index
// of window i's target within the source series, so downstream code can look
// up per-step quantities (prices, volatility estimates) aligned with the
// target.
struct window_dataset {
    enum class space { price, ret };

    space mode = space::price;
    std::size_t window_len = 0;
    std::size_t count = 0;
    std::vector<double> inputs;            // count * window_len
    std::vector<double> targets;           // count
    std::vector<std::size_t> target_index; // count

    std::span<const double> input(std::size_t i) const {
        return {inputs.data() + i * window_len, window_len};
    }
};

// Load one column of a headered CSV as a price series.  Lines starting with
// '#' are skipped as metadata comments.  Throws parse_error (malformed
// row/cell, with the 1-based data row), missing_column, or the price
// validation errors.
price_series load_price_csv(const std::filesystem::path& path,
                            const std::string& column = "close");

// Write a series as a two-column CSV ("t,<column>") readable by
// load_price_csv; each entry of `comments` becomes a leading '# ' line.
void write_price_csv(const std::filesystem::path& path,
                     const price_series& series,
                     const std::string& column = "close",
                     std::span<const std::string> comments = {});

// r_t = (S_{t+1} - S_t) / S_t.  Requires at least two prices.
return_series compute_returns(const price_series& series);

// Slice a series into windows.  A series of N values yields N - L windows
// (each window is L inputs plus one target, i.e. L+1 consecutive values);
// N > L is required.  In return space the N above counts returns, not prices.
window_dataset make_windows(const price_series& series, std::size_t window_len);
window_dataset make_windows(const return_series& series, std::size_t window_len);

}  // namespace finaug
