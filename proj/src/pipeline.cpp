#include "finaug/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "finaug/augment.hpp"
#include "finaug/errors.hpp"
#include "finaug/nn.hpp"
#include "finaug/rng.hpp"
#include "finaug/simd/kernels.hpp"

namespace finaug {

namespace {

constexpr std::array<pipeline_scheme, 5> kSchemeOrder = {
    pipeline_scheme::none,
    pipeline_scheme::weight_decay,
    pipeline_scheme::additive,
    pipeline_scheme::naive_multiplicative,
    pipeline_scheme::proposed_multiplicative,
};

output_head head_for(box_constraint constraint) {
    switch (constraint) {
        case box_constraint::unbounded: return output_head::identity;
        case box_constraint::box_short: return output_head::box_sym;
        case box_constraint::long_only: return output_head::box_long;
    }
    throw invalid_parameter("unknown position constraint");
}

struct split_data {
    price_series train;  // train_len + 1 prices
    price_series test;   // window_len warm-up returns + test_len traded steps
};

split_data split_series(const price_series& series,
                        const pipeline_config& cfg) {
    const std::size_t need = cfg.train_len + cfg.test_len + 1;
    if (series.prices.size() < need)
        throw series_too_short("series has " +
                               std::to_string(series.prices.size()) +
                               " prices; the splits need " +
                               std::to_string(need));
    split_data out;
    out.train.label = series.label;
    out.train.prices.assign(series.prices.begin(),
                            series.prices.begin() + cfg.train_len + 1);
    // The test segment keeps the last window_len training returns so the
    // first traded step already has a full trailing window.
    const std::size_t warm_start = cfg.train_len - cfg.window_len;
    out.test.label = series.label;
    out.test.prices.assign(series.prices.begin() + warm_start,
                           series.prices.begin() + need);
    return out;
}

gbm_params estimate_model(const return_series& returns, double s0) {
    const std::size_t n = returns.size();
    const double nf = static_cast<double>(n);
    const double mean = simd::sum(returns.returns.data(), n) / nf;
    const double sum_sq = simd::sum_squares(returns.returns.data(), n);
    const double var = n > 1 ? std::max(0.0, (sum_sq - nf * mean * mean) /
                                                 (nf - 1.0))
                             : 0.0;
    gbm_params est;
    est.s0 = s0;
    est.r = mean;
    est.sigma = std::sqrt(var);
    return est;
}

train_arrays base_arrays(const window_dataset& ds) {
    train_arrays a;
    a.n = ds.count;
    a.L = ds.window_len;
    a.inputs = ds.inputs;
    a.targets = ds.targets;
    a.input_sd.assign(a.n * a.L, 0.0);
    a.target_sd.assign(a.n, 0.0);
    a.penalty_scale.assign(a.n, 0.0);
    return a;
}

// Installs a per-return perturbation variance profile into the arrays:
// every window element gets the sd of its own return's noise, and the
// penalty coefficient is the target's noise variance (the output-penalty
// form of training on the noised data).
void fill_return_noise(train_arrays& a, const window_dataset& ds,
                       std::span<const double> per_return_var) {
    for (std::size_t i = 0; i < a.n; ++i) {
        const std::size_t tgt = ds.target_index[i];
        const std::size_t base = tgt - a.L;
        for (std::size_t j = 0; j < a.L; ++j)
            a.input_sd[i * a.L + j] = std::sqrt(per_return_var[base + j]);
        a.target_sd[i] = std::sqrt(per_return_var[tgt]);
        a.penalty_scale[i] = per_return_var[tgt];
    }
}

scheme_run run_scheme(pipeline_scheme scheme, const split_data& split,
                      const window_dataset& ds, const return_series& train_ret,
                      const pipeline_config& cfg, std::uint64_t run_seed,
                      double input_scale) {
    scheme_run out;
    out.scheme = scheme;

    train_config tc;
    tc.lambda = cfg.lambda;
    tc.c = 0.0;
    tc.objective = objective_mode::eq13_regularized;
    tc.minibatch = cfg.minibatch;
    tc.steps = cfg.sgd_steps;
    tc.learning_rate = cfg.learning_rate;
    tc.seed = run_seed;
    tc.weight_decay =
        scheme == pipeline_scheme::weight_decay ? cfg.weight_decay : 0.0;
    tc.tau = cfg.tau;
    tc.n_draws = cfg.n_draws;

    train_arrays arrays;
    const auto apply_strength = [&](const strength_value& s,
                                    auto&& variance_at) {
        if (s.unbounded || !(s.value > 0.0) || !std::isfinite(s.value)) {
            out.strength_unavailable = true;
            return;
        }
        std::vector<double> var(train_ret.size());
        for (std::size_t t = 0; t < var.size(); ++t) var[t] = variance_at(s.value, t);
        fill_return_noise(arrays, ds, var);
        out.strength = s.value;
        tc.c = 1.0;  // arrays carry absolute sds; the gate just enables them
    };

    switch (scheme) {
        case pipeline_scheme::none:
        case pipeline_scheme::weight_decay:
            // Augmentation-free training: nothing to average over, so the
            // objective is the plain mean wealth return (plus the coupled
            // L2 term for the weight-decay baseline).
            arrays = base_arrays(ds);
            break;
        case pipeline_scheme::additive: {
            arrays = base_arrays(ds);
            const gbm_params est =
                estimate_model(train_ret, split.train.prices.front());
            try {
                // Independent price-level noise with sd rho turns return t
                // into r_t + (eps' - eps)/S_t: variance 2 rho^2 / S_t^2.
                apply_strength(
                    optimal_additive_strength(split.train, est),
                    [&](double rho, std::size_t t) {
                        const double s = split.train.prices[t];
                        return 2.0 * rho * rho / (s * s);
                    });
            } catch (const zero_drift&) {
                out.strength_unavailable = true;
            }
            break;
        }
        case pipeline_scheme::naive_multiplicative: {
            arrays = base_arrays(ds);
            const gbm_params est =
                estimate_model(train_ret, split.train.prices.front());
            try {
                // Scaling each price by (1 + eps) with sd rho0 perturbs
                // return t by (1 + r_t) eps' - eps: variance
                // rho0^2 ((1 + r_t)^2 + 1).
                apply_strength(
                    optimal_naive_strength(split.train, est),
                    [&](double rho0, std::size_t t) {
                        const double g = 1.0 + train_ret.returns[t];
                        return rho0 * rho0 * (g * g + 1.0);
                    });
            } catch (const zero_drift&) {
                out.strength_unavailable = true;
            }
            break;
        }
        case pipeline_scheme::proposed_multiplicative: {
            tc.c = cfg.c;
            const vol_estimate vol =
                estimate_volatility(train_ret, cfg.vol_window);
            arrays = prepare_training_arrays(ds, train_ret, vol, tc);
            out.strength = cfg.c;
            break;
        }
    }

    std::vector<std::size_t> sizes;
    sizes.reserve(cfg.hidden.size() + 2);
    sizes.push_back(cfg.window_len);
    for (std::size_t h : cfg.hidden) sizes.push_back(h);
    sizes.push_back(1);

    const train_result fit =
        train_on_arrays(arrays, tc, std::move(sizes),
                        head_for(cfg.constraint), input_scale, nullptr);

    const mlp_model& model = fit.model;
    const backtest_rule rule = [&model](std::span<const double> window) {
        return forward(model, window);
    };
    out.trajectory = run_backtest(rule, split.test, cfg.window_len);
    out.bankrupt = out.trajectory.bankrupt;
    out.final_wealth = out.trajectory.wealth.back();
    try {
        out.sharpe_ratio = sharpe(out.trajectory);
    } catch (const zero_dispersion&) {
        out.degenerate = true;
        out.sharpe_ratio = 0.0;
    }
    return out;
}

std::uint64_t derive_run_seed(const noise_source& source, std::uint64_t k) {
    substream s = source.stream("train-seed", k);
    return s.next_u64();
}

void aggregate(pipeline_report& rep) {
    const auto order = pipeline_scheme_order();
    rep.mean_sharpe.assign(order.size(), 0.0);
    if (rep.seeds.empty()) return;
    for (const pipeline_seed_run& seed_run : rep.seeds)
        for (std::size_t s = 0; s < order.size(); ++s)
            rep.mean_sharpe[s] += seed_run.runs[s].sharpe_ratio;
    for (double& m : rep.mean_sharpe)
        m /= static_cast<double>(rep.seeds.size());
}

}  // namespace

std::string_view pipeline_scheme_name(pipeline_scheme scheme) {
    switch (scheme) {
        case pipeline_scheme::none: return "none";
        case pipeline_scheme::weight_decay: return "weight-decay";
        case pipeline_scheme::additive: return "additive";
        case pipeline_scheme::naive_multiplicative: return "naive";
        case pipeline_scheme::proposed_multiplicative: return "proposed";
    }
    throw invalid_parameter("unknown pipeline scheme");
}

std::span<const pipeline_scheme> pipeline_scheme_order() {
    return {kSchemeOrder.data(), kSchemeOrder.size()};
}

void pipeline_config::validate() const {
    model.validate();
    if (window_len < 1) throw invalid_parameter("window length must be >= 1");
    if (train_len <= window_len)
        throw series_too_short("training split must exceed the window length");
    if (test_len < 2)
        throw invalid_parameter("test split needs at least two traded steps");
    for (std::size_t h : hidden)
        if (h < 1) throw invalid_parameter("hidden layer sizes must be >= 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw invalid_parameter("risk aversion must be finite and >= 0");
    if (!(c >= 0.0) || !std::isfinite(c))
        throw invalid_parameter("strength factor must be finite and >= 0");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
        throw invalid_parameter("weight decay must be finite and >= 0");
    if (sgd_steps < 1) throw invalid_parameter("need at least one training step");
    if (minibatch < 1) throw invalid_parameter("minibatch must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw invalid_parameter("learning rate must be finite and >= 0");
    if (n_draws < 2) throw invalid_parameter("need at least two noise draws");
    if (tau < 1) throw invalid_parameter("smoothing window must be >= 1");
    if (vol_window < 2 || vol_window > train_len)
        throw invalid_parameter(
            "volatility window must be >= 2 and fit in the training split");
    if (n_seeds < 1) throw invalid_parameter("need at least one seed");
}

pipeline_seed_run run_pipeline_once(const price_series& series,
                                    const pipeline_config& cfg,
                                    std::uint64_t run_seed) {
    cfg.validate();
    series.validate();

    const split_data split = split_series(series, cfg);
    const return_series train_ret = compute_returns(split.train);
    const window_dataset ds = make_windows(train_ret, cfg.window_len);

    double input_scale =
        std::sqrt(simd::sum_squares(ds.inputs.data(), ds.inputs.size()) /
                  static_cast<double>(ds.inputs.size()));
    if (!(input_scale > 0.0)) input_scale = 1.0;

    pipeline_seed_run out;
    out.run_seed = run_seed;
    out.runs.reserve(kSchemeOrder.size());
    for (pipeline_scheme scheme : kSchemeOrder)
        out.runs.push_back(run_scheme(scheme, split, ds, train_ret, cfg,
                                      run_seed, input_scale));
    return out;
}

pipeline_report run_pipeline(const pipeline_config& cfg) {
    cfg.validate();
    const noise_source source(cfg.seed);
    pipeline_report rep;
    rep.seeds.reserve(cfg.n_seeds);
    for (std::uint64_t k = 0; k < cfg.n_seeds; ++k) {
        const price_series series =
            simulate_gbm(cfg.model, cfg.train_len + cfg.test_len, source, k);
        rep.seeds.push_back(
            run_pipeline_once(series, cfg, derive_run_seed(source, k)));
    }
    aggregate(rep);
    return rep;
}

pipeline_report run_pipeline(const pipeline_config& cfg,
                             const price_series& series) {
    cfg.validate();
    const noise_source source(cfg.seed);
    pipeline_report rep;
    rep.seeds.reserve(cfg.n_seeds);
    for (std::uint64_t k = 0; k < cfg.n_seeds; ++k)
        rep.seeds.push_back(
            run_pipeline_once(series, cfg, derive_run_seed(source, k)));
    aggregate(rep);
    return rep;
}

}  // namespace finaug
