#include "finaug/utility.hpp"

#include <cmath>
#include <numbers>

#include "finaug/errors.hpp"
#include "finaug/simd/kernels.hpp"

namespace finaug {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

utility_report make_utility_report(double gain, double risk, double se) {
    utility_report out;
    out.gain_term = gain;
    out.risk_term = risk;
    out.value = gain - risk;
    out.se = se;
    return out;
}

namespace {

void require_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw invalid_parameter("risk aversion must be finite and > 0");
}

void require_sigma(const gbm_params& model) {
    model.validate();
    if (!(model.sigma > 0.0)) throw zero_volatility();
}

double mean_of(const std::vector<double>& v) {
    return simd::sum(v.data(), v.size()) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v, double mean) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    double ss = 0.0;
    for (const double x : v) {
        const double d = x - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

utility_report empirical_utility(const portfolio& strategy,
                                 const price_series& prices,
                                 const augmentation_scheme& scheme,
                                 const vol_estimate* vol, double lambda,
                                 std::size_t n_draws, substream& noise) {
    require_lambda(lambda);
    prices.validate();
    scheme.validate();
    const return_series returns = compute_returns(prices);
    const std::size_t T = returns.size();
    if (strategy.weights.size() != T)
        throw length_mismatch("portfolio length does not match return count");

    if (scheme.kind == scheme_kind::none || scheme.strength == 0.0) {
        // No augmentation distribution: G_t = pi_t r_t exactly, variance 0.
        const double gain =
            simd::dot(strategy.weights.data(), returns.returns.data(), T) /
            static_cast<double>(T);
        return make_utility_report(gain, 0.0, 0.0);
    }

    if (n_draws < 2)
        throw invalid_parameter("need at least two draws to estimate variance");

    // One full-series redraw per sample; per-step wealth returns collected as
    // an n_draws x T matrix so the cross-step covariance within a draw is
    // reflected in the standard error.
    std::vector<double> G(n_draws * T);
    for (std::size_t d = 0; d < n_draws; ++d) {
        const price_series z = augment_prices(prices, scheme, vol, noise);
        for (std::size_t t = 0; t < T; ++t) {
            const double r_noisy =
                noisified_return(z.prices[t + 1], z.prices[t], prices.prices[t]);
            G[d * T + t] = strategy.weights[t] * r_noisy;
        }
    }

    const double nd = static_cast<double>(n_draws);
    std::vector<double> step_mean(T);
    for (std::size_t t = 0; t < T; ++t) {
        double s = 0.0;
        for (std::size_t d = 0; d < n_draws; ++d) s += G[d * T + t];
        step_mean[t] = s / nd;
    }

    double gain = 0.0, risk = 0.0;
    const double bias = nd / (nd - 1.0);  // sample-variance correction
    std::vector<double> per_draw(n_draws, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        const double m = step_mean[t];
        double var = 0.0;
        for (std::size_t d = 0; d < n_draws; ++d) {
            const double dev = G[d * T + t] - m;
            var += dev * dev;
            per_draw[d] += G[d * T + t] - lambda * bias * dev * dev;
        }
        var = var / (nd - 1.0);
        gain += m;
        risk += lambda * var;
    }
    const double Tf = static_cast<double>(T);
    for (double& u : per_draw) u /= Tf;
    const double value_mean = mean_of(per_draw);
    return make_utility_report(gain / Tf, risk / Tf, se_of(per_draw, value_mean));
}

utility_report inner_utility_exact(const portfolio& strategy,
                                   const gbm_params& model, double lambda) {
    require_lambda(lambda);
    require_sigma(model);
    const std::size_t T = strategy.weights.size();
    if (T == 0) throw length_mismatch("empty portfolio");
    const double Tf = static_cast<double>(T);
    const double gain =
        model.r * simd::sum(strategy.weights.data(), T) / Tf;
    const double risk = lambda * model.sigma * model.sigma / 2.0 *
                        simd::sum_squares(strategy.weights.data(), T) / Tf;
    return make_utility_report(gain, risk);
}

utility_report inner_utility_sampled(const portfolio& strategy,
                                     const gbm_params& model, double lambda,
                                     std::size_t n_test,
                                     const noise_source& noise) {
    require_lambda(lambda);
    require_sigma(model);
    const std::size_t T = strategy.weights.size();
    if (T == 0) throw length_mismatch("empty portfolio");
    if (n_test < 2) throw invalid_parameter("need at least two test sets");

    // Future returns are i.i.d. N(r, sigma^2); sample whole test
    // trajectories, one substream per test set.
    const double nd = static_cast<double>(n_test);
    std::vector<double> G(n_test * T);
    for (std::size_t j = 0; j < n_test; ++j) {
        substream s = noise.stream("inner-test", j);
        for (std::size_t t = 0; t < T; ++t) {
            const double r_future = model.r + model.sigma * s.next();
            G[j * T + t] = strategy.weights[t] * r_future;
        }
    }

    std::vector<double> step_mean(T);
    for (std::size_t t = 0; t < T; ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_test; ++j) s += G[j * T + t];
        step_mean[t] = s / nd;
    }

    double gain = 0.0, risk = 0.0;
    const double bias = nd / (nd - 1.0);
    const double half_lambda = lambda / 2.0;
    std::vector<double> per_set(n_test, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        const double m = step_mean[t];
        double var = 0.0;
        for (std::size_t j = 0; j < n_test; ++j) {
            const double dev = G[j * T + t] - m;
            var += dev * dev;
            per_set[j] += G[j * T + t] - half_lambda * bias * dev * dev;
        }
        var = var / (nd - 1.0);
        gain += m;
        risk += half_lambda * var;
    }
    const double Tf = static_cast<double>(T);
    for (double& u : per_set) u /= Tf;
    const double value_mean = mean_of(per_set);
    return make_utility_report(gain / Tf, risk / Tf, se_of(per_set, value_mean));
}

utility_report true_utility_no_aug(const gbm_params& model, double lambda) {
    require_lambda(lambda);
    require_sigma(model);
    const double gain =
        (1.0 - 2.0 * normal_cdf(-model.r / model.sigma)) * model.r;
    const double risk = lambda * model.sigma * model.sigma / 2.0;
    return make_utility_report(gain, risk);
}

utility_report true_utility_proposed(const gbm_params& model, double lambda) {
    require_lambda(lambda);
    require_sigma(model);
    // The fitted strategy invests pi = r/(lambda sigma^2) exactly when the
    // training return was positive (probability Phi(r/sigma)); per-step gain
    // and risk follow from the i.i.d. future return.
    const double invest_prob = normal_cdf(model.r / model.sigma);
    const double pi = model.r / (lambda * model.sigma * model.sigma);
    const double gain = invest_prob * pi * model.r;
    const double risk =
        invest_prob * lambda * model.sigma * model.sigma / 2.0 * pi * pi;
    return make_utility_report(gain, risk);
}

double additive_utility_bracket(const price_series& series) {
    const return_series returns = compute_returns(series);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        const double s = series.prices[t];
        const double a = returns.returns[t] * s * s;
        num += a;
        den += a * a;
    }
    if (!(num > 0.0) || den == 0.0) return 0.0;
    return num * num / den;
}

utility_report true_utility_additive(const gbm_params& model, double lambda,
                                     std::size_t T, std::size_t n_train_sets,
                                     const noise_source& noise) {
    require_lambda(lambda);
    require_sigma(model);
    if (n_train_sets < 2)
        throw invalid_parameter("need at least two training sets");

    const double pref = model.r * model.r /
                        (2.0 * lambda * model.sigma * model.sigma *
                         static_cast<double>(T));
    std::vector<double> values(n_train_sets);
    for (std::size_t i = 0; i < n_train_sets; ++i) {
        const price_series series = simulate_gbm(model, T, noise, i);
        values[i] = pref * additive_utility_bracket(series);
    }
    const double mean = mean_of(values);
    // The fitted strategy's gain is exactly twice its risk at the optimum,
    // so value = gain - risk decomposes as (2x - x) = x.
    return make_utility_report(2.0 * mean, mean, se_of(values, mean));
}

utility_report true_utility_mc(const strategy_builder& builder,
                               const gbm_params& model, double lambda,
                               std::size_t T, std::size_t n_train_sets,
                               std::size_t n_test_sets,
                               const noise_source& noise) {
    require_lambda(lambda);
    require_sigma(model);
    if (n_train_sets < 1)
        throw invalid_parameter("need at least one training set");

    std::vector<double> values(n_train_sets);
    double gain = 0.0, risk = 0.0;
    for (std::size_t i = 0; i < n_train_sets; ++i) {
        const price_series series = simulate_gbm(model, T, noise, i);
        const return_series returns = compute_returns(series);
        const portfolio strategy = builder(series, returns);
        const utility_report inner =
            n_test_sets == 0
                ? inner_utility_exact(strategy, model, lambda)
                : inner_utility_sampled(strategy, model, lambda, n_test_sets,
                                        noise_source(noise.seed() ^ (i * 0x9e3779b97f4a7c15ULL + 1),
                                                     noise.dist()));
        values[i] = inner.value;
        gain += inner.gain_term;
        risk += inner.risk_term;
    }
    const double n = static_cast<double>(n_train_sets);
    const double mean = mean_of(values);
    return make_utility_report(gain / n, risk / n, se_of(values, mean));
}

}  // namespace finaug
