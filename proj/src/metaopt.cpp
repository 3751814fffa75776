#include "finaug/metaopt.hpp"

#include <cmath>

#include "finaug/errors.hpp"
#include "finaug/portfolio.hpp"

namespace finaug {

void theta_grid::validate() const {
    if (values.empty()) throw invalid_parameter("theta grid is empty");
    for (const double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw invalid_parameter("theta grid values must be finite and >= 0");
}

void omega_prior::validate() const {
    if (support.empty()) throw invalid_parameter("prior support is empty");
    if (support.size() != weights.size())
        throw length_mismatch("prior support and weights sizes disagree");
    double total = 0.0;
    for (const double w : weights) {
        if (!(w >= 0.0)) throw invalid_parameter("prior weights must be >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw invalid_parameter("prior weights must sum to 1");
}

namespace {

// Fitted closed-form strategy under a fixed strength theta for one series.
portfolio fit_under_theta(scheme_kind kind, double theta,
                          const price_series& series,
                          const return_series& returns,
                          const gbm_params& model, double lambda) {
    if (theta <= 0.0)
        throw invalid_parameter(
            "fitted-strategy evaluation requires theta > 0");
    std::vector<strength_value> gamma_sq(returns.size());
    switch (kind) {
        case scheme_kind::additive:
            for (auto& g : gamma_sq) g = strength_value::finite(theta * theta);
            break;
        case scheme_kind::naive_multiplicative:
            for (std::size_t t = 0; t < returns.size(); ++t) {
                const double s = series.prices[t];
                gamma_sq[t] = strength_value::finite(theta * theta * s * s);
            }
            break;
        case scheme_kind::proposed_multiplicative: {
            // theta scales the per-series optimal per-step strengths.
            gamma_sq = optimal_proposed_strength_sq(series, model);
            for (auto& g : gamma_sq)
                if (!g.unbounded) g.value *= theta;
            break;
        }
        case scheme_kind::none:
            throw invalid_parameter("no strength to tune for scheme none");
    }
    return augmented_closed_form(returns, series, lambda, gamma_sq);
}

theta_curve argmax_curve(const theta_grid& grid,
                         const std::vector<double>& value,
                         const std::vector<double>& se) {
    theta_curve out;
    out.theta = grid.values;
    out.value = value;
    out.se = se;
    out.best_index = 0;
    // Strict improvement required, so exact ties resolve to the smaller
    // theta encountered first.
    for (std::size_t i = 1; i < value.size(); ++i)
        if (value[i] > value[out.best_index]) out.best_index = i;
    return out;
}

}  // namespace

theta_evaluator make_fitted_evaluator(scheme_kind kind, double lambda,
                                      std::size_t T, std::size_t n_train_sets,
                                      std::uint64_t seed) {
    return [=](double theta, const gbm_params& model) {
        const noise_source noise(seed);
        const strategy_builder builder =
            [&](const price_series& series, const return_series& returns) {
                return fit_under_theta(kind, theta, series, returns, model,
                                       lambda);
            };
        return true_utility_mc(builder, model, lambda, T, n_train_sets,
                               /*n_test_sets=*/0, noise);
    };
}

theta_curve best_theta_with(const theta_grid& grid, const gbm_params& model,
                            const theta_evaluator& eval) {
    grid.validate();
    std::vector<double> value(grid.values.size()), se(grid.values.size());
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        const utility_report r = eval(grid.values[i], model);
        value[i] = r.value;
        se[i] = r.se;
    }
    return argmax_curve(grid, value, se);
}

theta_curve best_theta(const theta_grid& grid, const gbm_params& model,
                       double lambda, std::size_t T, std::size_t n_train_sets,
                       std::uint64_t seed) {
    return best_theta_with(
        grid, model,
        make_fitted_evaluator(grid.kind, lambda, T, n_train_sets, seed));
}

theta_curve bayes_theta_with(const theta_grid& grid, const omega_prior& prior,
                             const theta_evaluator& eval) {
    grid.validate();
    prior.validate();
    std::vector<double> value(grid.values.size(), 0.0);
    std::vector<double> se(grid.values.size(), 0.0);
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        double var = 0.0;
        for (std::size_t k = 0; k < prior.support.size(); ++k) {
            const double w = prior.weights[k];
            if (w == 0.0) continue;  // zero-weight points cannot contribute
            const utility_report r = eval(grid.values[i], prior.support[k]);
            value[i] += w * r.value;
            var += w * w * r.se * r.se;
        }
        se[i] = std::sqrt(var);
    }
    return argmax_curve(grid, value, se);
}

theta_curve bayes_theta(const theta_grid& grid, const omega_prior& prior,
                        double lambda, std::size_t T, std::size_t n_train_sets,
                        std::uint64_t seed) {
    return bayes_theta_with(
        grid, prior,
        make_fitted_evaluator(grid.kind, lambda, T, n_train_sets, seed));
}

theta_curve minimax_theta_with(const theta_grid& grid,
                               std::span<const gbm_params> omegas,
                               const theta_evaluator& eval) {
    grid.validate();
    if (omegas.empty()) throw invalid_parameter("omega set is empty");
    std::vector<double> value(grid.values.size());
    std::vector<double> se(grid.values.size());
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        double worst = 0.0, worst_se = 0.0;
        bool first = true;
        for (const gbm_params& omega : omegas) {
            const utility_report r = eval(grid.values[i], omega);
            if (first || r.value < worst) {
                worst = r.value;
                worst_se = r.se;
                first = false;
            }
        }
        value[i] = worst;
        se[i] = worst_se;
    }
    return argmax_curve(grid, value, se);
}

theta_curve minimax_theta(const theta_grid& grid,
                          std::span<const gbm_params> omegas, double lambda,
                          std::size_t T, std::size_t n_train_sets,
                          std::uint64_t seed) {
    return minimax_theta_with(
        grid, omegas,
        make_fitted_evaluator(grid.kind, lambda, T, n_train_sets, seed));
}

}  // namespace finaug
