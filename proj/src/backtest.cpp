#include "finaug/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "finaug/errors.hpp"

namespace finaug {

wealth_trajectory run_backtest(const backtest_rule& rule,
                               const price_series& test,
                               std::size_t window_len) {
    test.validate();
    return run_backtest(rule, compute_returns(test), window_len);
}

wealth_trajectory run_backtest(const backtest_rule& rule,
                               const return_series& test_returns,
                               std::size_t window_len) {
    test_returns.validate();
    if (window_len == 0) throw invalid_parameter("window length must be >= 1");
    const auto& r = test_returns.returns;
    if (r.size() <= window_len)
        throw series_too_short(
            "backtest needs more returns than the window length (got " +
            std::to_string(r.size()) + " for window " +
            std::to_string(window_len) + ")");

    wealth_trajectory out;
    const std::size_t steps = r.size() - window_len;
    out.wealth.reserve(steps + 1);
    out.positions.reserve(steps);
    out.step_returns.reserve(steps);
    out.wealth.push_back(1.0);

    for (std::size_t t = window_len; t < r.size(); ++t) {
        const std::span<const double> trailing(r.data() + (t - window_len),
                                               window_len);
        const double pi = rule(trailing);
        if (!std::isfinite(pi))
            throw non_finite_value("strategy produced a non-finite position");
        const double w_next = out.wealth.back() * (1.0 + pi * r[t]);
        out.positions.push_back(pi);
        out.step_returns.push_back(r[t]);
        out.wealth.push_back(w_next);
        if (!(w_next > 0.0)) {
            out.bankrupt = true;
            break;
        }
    }
    return out;
}

std::vector<double> wealth_returns(std::span<const double> wealth) {
    if (wealth.size() < 2)
        throw series_too_short("need at least two wealth points");
    std::vector<double> out(wealth.size() - 1);
    for (std::size_t i = 0; i + 1 < wealth.size(); ++i) {
        if (wealth[i] == 0.0)
            throw invalid_parameter("wealth return undefined at zero wealth");
        out[i] = wealth[i + 1] / wealth[i] - 1.0;
    }
    return out;
}

double sharpe(std::span<const double> wealth) {
    const std::vector<double> r = wealth_returns(wealth);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    if (*lo == *hi)
        throw zero_dispersion("all wealth returns equal; ratio undefined");
    const double n = static_cast<double>(r.size());
    double mean = 0.0, mean_sq = 0.0;
    for (double x : r) {
        mean += x;
        mean_sq += x * x;
    }
    mean /= n;
    mean_sq /= n;
    const double var = mean_sq - mean * mean;  // population form
    if (!(var > 0.0))
        throw zero_dispersion("wealth return dispersion vanished numerically");
    return mean / std::sqrt(var);
}

double sharpe(const wealth_trajectory& trajectory) {
    return sharpe(std::span<const double>(trajectory.wealth));
}

void mcl_point::validate() const {
    if (!std::isfinite(mean_return) || !std::isfinite(risk))
        throw non_finite_value("capital-line point must be finite");
    if (risk < 0.0) throw invalid_parameter("risk must be >= 0");
}

mcl_result mcl_slope(std::span<const mcl_point> points, double r0) {
    if (points.empty()) throw empty_batch("no capital-line points given");
    if (!std::isfinite(r0)) throw non_finite_value("r0 must be finite");

    bool found = false;
    mcl_result best;
    for (const mcl_point& p : points) {
        p.validate();
        if (!(p.mean_return > r0)) continue;
        const double slope = p.risk / (p.mean_return - r0);
        if (!found || slope < best.slope) {
            best.best = p;
            best.slope = slope;
            found = true;
        }
    }
    if (!found)
        throw no_excess_return("no point exceeds the risk-free rate");
    return best;
}

}  // namespace finaug
