#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "finaug/series.hpp"

namespace finaug {

// Decision rule for a rolling backtest: receives the trailing window of
// returns (oldest first, most recent last) and produces the position for the
// upcoming step.
using backtest_rule = std::function<double(std::span<const double>)>;

struct wealth_trajectory {
    // wealth[0] = 1 by convention; wealth[k+1] = wealth[k] * (1 + positions[k] * step_return[k])
    // exactly, so the path can be reconstructed bit-for-bit from positions and
    // the returns they were applied to.
    std::vector<double> wealth;
    std::vector<double> positions;
    std::vector<double> step_returns;  // the realized return each position was applied to
    bool bankrupt = false;             // wealth reached <= 0; trajectory truncated there
};

// Rolls `rule` over the test series: at each step the trailing `window_len`
// returns are fed to the rule and wealth is compounded by 1 + pi * r.  Needs
// more than window_len returns (at least one tradable step); throws
// series_too_short otherwise.  A step that drives wealth to <= 0 is recorded,
// the trajectory is truncated there, and `bankrupt` is set instead of
// throwing, so studies can count blow-ups.
wealth_trajectory run_backtest(const backtest_rule& rule,
                               const price_series& test,
                               std::size_t window_len);

// Same rolling evaluation on a pre-computed return series.
wealth_trajectory run_backtest(const backtest_rule& rule,
                               const return_series& test_returns,
                               std::size_t window_len);

// Per-step wealth returns R_k = W_{k+1}/W_k - 1.
std::vector<double> wealth_returns(std::span<const double> wealth);

// Sharpe ratio of the wealth path: mean wealth return over its population
// standard deviation, SR = M / sqrt(mean(R^2) - M^2).  No annualization.
// Needs at least two wealth points; throws zero_dispersion when all wealth
// returns are equal (the ratio is undefined there, including the all-zero
// case).  A zero mean with positive dispersion returns 0.
double sharpe(std::span<const double> wealth);
double sharpe(const wealth_trajectory& trajectory);

struct mcl_point {
    double mean_return = 0.0;  // per-step expected wealth return
    double risk = 0.0;         // standard deviation of wealth return, >= 0
    std::string label;

    void validate() const;
};

struct mcl_result {
    mcl_point best;
    double slope = 0.0;
};

// Capital-line comparison with risk on the numerator: for each point with
// mean_return > r0 the slope is risk / (mean_return - r0) -- risk paid per
// unit of excess return, so smaller is better -- and the minimizing point is
// returned.  A zero-risk point above r0 wins with slope 0.  Throws
// no_excess_return when no point beats r0.
mcl_result mcl_slope(std::span<const mcl_point> points, double r0);

}  // namespace finaug
