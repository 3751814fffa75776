// Acceptance gate: one binary that drives every release-blocking numeric
// property end to end and prints a single PASS/FAIL line per criterion.
// Exit status is 0 only when every criterion holds.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "finaug/augment.hpp"
#include "finaug/backtest.hpp"
#include "finaug/errors.hpp"
#include "finaug/linalg.hpp"
#include "finaug/metaopt.hpp"
#include "finaug/nn.hpp"
#include "finaug/pipeline.hpp"
#include "finaug/portfolio.hpp"
#include "finaug/procgen.hpp"
#include "finaug/rng.hpp"
#include "finaug/series.hpp"
#include "finaug/utility.hpp"
#include "oracles.hpp"

using namespace finaug;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const char* what, const std::string& detail) {
    std::printf("[%2d] %s  %s | %s\n", idx, pass ? "PASS" : "FAIL", what,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

gbm_params base_model() {
    gbm_params m;
    m.s0 = 1.0;
    m.r = 0.005;
    m.sigma = 0.01;
    return m;
}

// ---------------------------------------------------------------------------
// 1. Expected generalization utility of the sign strategy.

void criterion_sign_utility() {
    const gbm_params model = base_model();
    const noise_source noise(101);
    const strategy_builder builder = [](const price_series&,
                                        const return_series& ret) {
        return sign_strategy(ret);
    };
    const utility_report mc =
        true_utility_mc(builder, model, 1.0, 400, 2000, 0, noise);
    const double diff = std::abs(mc.value - oracles::kSignUtility);
    const bool pass = mc.se > 0.0 && diff <= 3.0 * mc.se;
    report(1, pass, "sign-strategy utility matches its closed form",
           fmt("mc=%.6e target=%.6e |diff|=%.2e 3se=%.2e", mc.value,
               oracles::kSignUtility, diff, 3.0 * mc.se));
}

// ---------------------------------------------------------------------------
// 2. Expected generalization utility of the fitted per-step-strength strategy.

void criterion_per_step_utility() {
    const gbm_params model = base_model();
    const noise_source noise(202);
    const strategy_builder builder = [&](const price_series&,
                                         const return_series& ret) {
        return proposed_optimal_portfolio(ret, model, 1.0);
    };
    const utility_report mc =
        true_utility_mc(builder, model, 1.0, 400, 2000, 0, noise);
    const double diff = std::abs(mc.value - oracles::kPerStepUtility);
    const bool pass = mc.se > 0.0 && diff <= 3.0 * mc.se;
    report(2, pass, "per-step-strength utility matches its closed form",
           fmt("mc=%.6e target=%.6e |diff|=%.2e 3se=%.2e", mc.value,
               oracles::kPerStepUtility, diff, 3.0 * mc.se));
}

// ---------------------------------------------------------------------------
// 3. Scheme ordering under common random numbers.

void criterion_scheme_ordering() {
    const gbm_params model = base_model();
    const double lambda = 1.0;
    const std::uint64_t seed = 303;  // shared: identical training sets

    const strategy_builder sign_builder = [](const price_series&,
                                             const return_series& ret) {
        return sign_strategy(ret);
    };
    const strategy_builder per_step_builder =
        [&](const price_series&, const return_series& ret) {
            return proposed_optimal_portfolio(ret, model, lambda);
        };
    const strategy_builder additive_builder =
        [&](const price_series& s, const return_series& ret) {
            const strength_value rho = optimal_additive_strength(s, model);
            std::vector<strength_value> g(
                ret.size(), rho.unbounded
                                ? strength_value::infinite()
                                : strength_value::finite(rho.value * rho.value));
            return augmented_closed_form(ret, s, lambda, g);
        };

    const utility_report u_mult = true_utility_mc(
        per_step_builder, model, lambda, 400, 2000, 0, noise_source(seed));
    const utility_report u_add = true_utility_mc(
        additive_builder, model, lambda, 400, 2000, 0, noise_source(seed));
    const utility_report u_none = true_utility_mc(
        sign_builder, model, lambda, 400, 2000, 0, noise_source(seed));

    const double se_ma = std::sqrt(u_mult.se * u_mult.se + u_add.se * u_add.se);
    const double se_mn =
        std::sqrt(u_mult.se * u_mult.se + u_none.se * u_none.se);
    const bool pass = (u_mult.value - u_add.value > 3.0 * se_ma) &&
                      (u_mult.value - u_none.value > 3.0 * se_mn);
    report(3, pass, "per-step scheme dominates additive and no-augmentation",
           fmt("per-step=%.4e additive=%.4e none=%.4e margins=%.2e/%.2e "
               "(3se=%.2e/%.2e)",
               u_mult.value, u_add.value, u_none.value,
               u_mult.value - u_add.value, u_mult.value - u_none.value,
               3.0 * se_ma, 3.0 * se_mn));
}

// ---------------------------------------------------------------------------
// 4. Closed-form optimal strengths against brute-force maximization.

void criterion_strength_oracles() {
    const gbm_params model = base_model();
    const std::size_t T = 100;
    double worst = 0.0;
    bool usable = true;

    const auto utility_under = [&](const price_series& s,
                                   const return_series& ret, double lambda,
                                   const std::function<double(std::size_t)>&
                                       gamma_sq_at) {
        std::vector<strength_value> g(ret.size());
        for (std::size_t t = 0; t < g.size(); ++t)
            g[t] = strength_value::finite(gamma_sq_at(t));
        return inner_utility_exact(augmented_closed_form(ret, s, lambda, g),
                                   model, lambda)
            .value;
    };

    for (int k = 0; k < 20 && usable; ++k) {
        const noise_source ns(9000 + static_cast<std::uint64_t>(k));
        const price_series s = simulate_gbm(model, T, ns, 0);
        const return_series ret = compute_returns(s);
        // The adjudicated factor question: the maximizer must be free of the
        // risk-aversion parameter, so probe two different values of it.
        const double lambda = (k < 5) ? 2.5 : 1.0;

        const strength_value rho = optimal_additive_strength(s, model);
        const strength_value rho0 = optimal_naive_strength(s, model);
        if (rho.unbounded || rho0.unbounded) {
            usable = false;
            break;
        }

        const double rho_hat = oracles::brute_force_max_1d(
            [&](double x) {
                return utility_under(s, ret, lambda,
                                     [&](std::size_t) { return x * x; });
            },
            rho.value / 8.0, rho.value * 8.0);
        worst = std::max(worst, std::abs(rho_hat - rho.value) / rho.value);

        const double rho0_hat = oracles::brute_force_max_1d(
            [&](double x) {
                return utility_under(s, ret, lambda, [&](std::size_t t) {
                    const double p = s.prices[t];
                    return x * x * p * p;
                });
            },
            rho0.value / 8.0, rho0.value * 8.0);
        const double sq = rho0_hat * rho0_hat;
        const double sq_ref = rho0.value * rho0.value;
        worst = std::max(worst, std::abs(sq - sq_ref) / sq_ref);
    }
    const bool pass = usable && worst <= 1e-3;
    report(4, pass, "closed-form strengths match brute-force maximization",
           usable ? fmt("20 series, worst relative error=%.2e (tol 1e-3)",
                        worst)
                  : std::string("unbounded strength on a probe series"));
}

// ---------------------------------------------------------------------------
// 5. Constant-output training recovers the stationary weight.

void criterion_stationary_recovery() {
    const gbm_params model = base_model();
    const double lambda = 1.0;
    const noise_source ns(555);
    const price_series s = simulate_gbm(model, 2000, ns, 0);
    const return_series ret = compute_returns(s);

    // Constant feature, per-step signed penalty scales built from the model
    // parameters: their sample mean makes the optimizer's fixed point land
    // exactly on the stationary weight.
    train_arrays d;
    d.n = ret.size();
    d.L = 1;
    d.inputs.assign(d.n, 1.0);
    d.targets = ret.returns;
    d.input_sd.assign(d.n, 0.0);
    d.target_sd.assign(d.n, 0.0);
    d.penalty_scale.resize(d.n);
    const double pref = model.sigma * model.sigma / (2.0 * model.r);
    for (std::size_t i = 0; i < d.n; ++i)
        d.penalty_scale[i] = pref * ret.returns[i];

    train_config tc;
    tc.lambda = lambda;
    tc.c = 0.0;
    tc.objective = objective_mode::eq13_regularized;
    tc.minibatch = d.n;  // full batch: deterministic quadratic descent
    tc.steps = 20000;
    tc.learning_rate = 0.05;
    tc.seed = 9;

    const train_result res =
        train_on_arrays(d, tc, {1, 1}, output_head::identity, 1.0);
    const std::vector<double> one = {1.0};
    const double pi = forward(res.model, one);
    const double target = merton_stationary(model, lambda);
    const double rel = std::abs(pi - target) / target;
    report(5, rel <= 0.02, "constant-output training finds the stationary weight",
           fmt("pi=%.4f target=%.4f rel=%.4f (tol 0.02)", pi, target, rel));
}

// ---------------------------------------------------------------------------
// 6. Sampled risk agrees with the closed-form output penalty.

void criterion_risk_equivalence() {
    const std::size_t n = 8, D = 10000;
    const double lambda = 1.3, pi = 0.8;

    train_arrays d;
    d.n = n;
    d.L = 1;
    d.inputs.assign(n, 0.0);
    d.targets.assign(n, 0.004);
    d.input_sd.assign(n, 0.0);
    d.target_sd.resize(n);
    d.penalty_scale.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.target_sd[i] = 0.01 + 0.005 * static_cast<double>(i);
        d.penalty_scale[i] = d.target_sd[i] * d.target_sd[i];
    }

    mlp_model m;
    m.sizes = {1, 1};
    m.W = {{0.0}};
    m.b = {{pi}};
    m.head = output_head::identity;

    std::vector<std::size_t> batch(n);
    for (std::size_t i = 0; i < n; ++i) batch[i] = i;

    train_config cfg;
    cfg.lambda = lambda;
    cfg.c = 1.0;
    cfg.n_draws = D;

    const noise_source src(606);
    substream ns = src.stream("risk-equivalence");

    cfg.objective = objective_mode::sampled_aug;
    const std::vector<double> noise_s =
        ns.draw(loss_noise_count(cfg.objective, n, 1, D));
    const double risk_sampled = loss_eval(m, d, batch, cfg, noise_s).risk;

    cfg.objective = objective_mode::eq13_regularized;
    const std::vector<double> noise_r =
        ns.draw(loss_noise_count(cfg.objective, n, 1, D));
    const double risk_closed = loss_eval(m, d, batch, cfg, noise_r).risk;

    // Per element the sampled risk is a chi-square mean with
    // variance 2 sd^4 / (D - 1) around pi^2 sd^2.
    double var_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s2 = pi * pi * d.target_sd[i] * d.target_sd[i];
        var_sum += 2.0 * s2 * s2 / static_cast<double>(D - 1);
    }
    const double se = lambda * std::sqrt(var_sum) / static_cast<double>(n);
    const double diff = std::abs(risk_sampled - risk_closed);
    report(6, diff <= 3.0 * se,
           "sampled risk matches the closed-form output penalty",
           fmt("sampled=%.6e closed=%.6e |diff|=%.2e 3se=%.2e", risk_sampled,
               risk_closed, diff, 3.0 * se));
}

// ---------------------------------------------------------------------------
// 7. Analytic gradients against central finite differences, all loss modes.

void criterion_gradient_integrity() {
    // Nontrivial arrays with noise scales everywhere.
    const noise_source src(707);
    substream s = src.stream("arrays");
    train_arrays d;
    d.n = 6;
    d.L = 3;
    d.inputs = s.draw(d.n * d.L);
    for (double& v : d.inputs) v *= 0.01;
    d.targets = s.draw(d.n);
    for (double& v : d.targets) v = 0.005 + 0.01 * v;
    d.input_sd.resize(d.n * d.L);
    for (double& v : d.input_sd) v = 0.002 + 0.001 * std::abs(s.next());
    d.target_sd.resize(d.n);
    for (double& v : d.target_sd) v = 0.002 + 0.001 * std::abs(s.next());
    d.penalty_scale.resize(d.n);
    for (double& v : d.penalty_scale) v = 1e-4 * (1.0 + std::abs(s.next()));

    std::vector<std::size_t> batch(d.n);
    for (std::size_t i = 0; i < d.n; ++i) batch[i] = i;

    double worst = 0.0;
    for (const objective_mode mode :
         {objective_mode::eq13_regularized, objective_mode::sampled_aug,
          objective_mode::full_three_term}) {
        train_config cfg;
        cfg.lambda = 1.3;
        cfg.c = 1.0;
        cfg.objective = mode;
        cfg.n_draws = 4;

        mlp_model model = make_mlp({3, 4, 1}, output_head::box_sym, 5, 1.0);
        substream ns = src.stream("fd", static_cast<std::uint64_t>(mode));
        const std::vector<double> noise =
            ns.draw(loss_noise_count(mode, batch.size(), d.L, cfg.n_draws));

        mlp_gradient grad = zero_gradient(model);
        loss_and_gradient(model, d, batch, cfg, noise, grad);
        std::vector<double> analytic;
        for (const auto& layer : grad.W)
            analytic.insert(analytic.end(), layer.begin(), layer.end());
        for (const auto& layer : grad.b)
            analytic.insert(analytic.end(), layer.begin(), layer.end());

        std::vector<double*> slots;
        for (auto& layer : model.W)
            for (double& w : layer) slots.push_back(&w);
        for (auto& layer : model.b)
            for (double& b : layer) slots.push_back(&b);

        for (std::size_t k = 0; k < slots.size(); ++k) {
            const double h = 1e-6;
            const double save = *slots[k];
            *slots[k] = save + h;
            const double up = loss_eval(model, d, batch, cfg, noise).loss;
            *slots[k] = save - h;
            const double dn = loss_eval(model, d, batch, cfg, noise).loss;
            *slots[k] = save;
            const double fd = (up - dn) / (2.0 * h);
            const double scale =
                std::max({std::abs(fd), std::abs(analytic[k]), 1e-8});
            worst = std::max(worst, std::abs(fd - analytic[k]) / scale);
        }
    }
    report(7, worst <= 1e-4, "analytic gradients match finite differences",
           fmt("worst relative error=%.2e over 3 loss modes (tol 1e-4)",
               worst));
}

// ---------------------------------------------------------------------------
// 8. Held-out Sharpe comparison across training schemes.

void criterion_pipeline_ordering() {
    const pipeline_config cfg;  // library defaults: 400/400, 5 seeds
    const pipeline_report rep = run_pipeline(cfg);

    const auto order = pipeline_scheme_order();
    std::string detail;
    for (std::size_t i = 0; i < order.size(); ++i) {
        detail += std::string(pipeline_scheme_name(order[i])) + "=" +
                  fmt("%+.4f", rep.mean_sharpe[i]);
        if (i + 1 < order.size()) detail += " ";
    }
    const double none_m = rep.mean_sharpe[0], wd_m = rep.mean_sharpe[1];
    const double add_m = rep.mean_sharpe[2], naive_m = rep.mean_sharpe[3];
    const double prop_m = rep.mean_sharpe[4];

    const bool required = prop_m > none_m;  // the release-blocking part
    const bool full_pattern = prop_m > add_m && prop_m > naive_m &&
                              std::min(add_m, naive_m) > std::max(none_m, wd_m);
    report(8, required,
           "held-out Sharpe: per-step scheme strictly above plain training",
           detail + (full_pattern ? " | full tier pattern held"
                                  : " | full tier pattern NOT held (reported)"));
}

// ---------------------------------------------------------------------------
// 9. Dispersion of the Sharpe estimator.

void criterion_sharpe_dispersion() {
    const gbm_params model = base_model();
    const noise_source ns(909);
    const backtest_rule hold = [](std::span<const double>) { return 1.0; };
    std::vector<double> ratios;
    ratios.reserve(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        // 201 returns, window 1 -> exactly 200 traded steps.
        const price_series s = simulate_gbm(model, 201, ns, i);
        ratios.push_back(sharpe(run_backtest(hold, s, 1)));
    }
    const double sd = oracles::sample_sd(ratios);
    const double rel = std::abs(sd - oracles::kInvSqrt200) / oracles::kInvSqrt200;
    report(9, rel <= 0.20, "Sharpe-estimator dispersion matches 1/sqrt(T)",
           fmt("sd=%.4f expected=%.4f rel=%.3f (tol 0.20)", sd,
               oracles::kInvSqrt200, rel));
}

// ---------------------------------------------------------------------------
// 10. Strength search recovers the closed-form optimum on a fixed series.

void criterion_search_recovery() {
    const gbm_params model = base_model();
    const std::size_t T = 60;
    const std::uint64_t seed = 2024;

    const noise_source ns(seed);
    const price_series s = simulate_gbm(model, T, ns, 0);
    const strength_value rho = optimal_additive_strength(s, model);
    if (rho.unbounded) {
        report(10, false, "strength search recovers the closed-form optimum",
               "probe series hit the unbounded corner");
        return;
    }
    const double cell = rho.value / 8.0;
    theta_grid grid;
    grid.kind = scheme_kind::additive;
    for (int i = 1; i <= 24; ++i)
        grid.values.push_back(cell * static_cast<double>(i));
    const theta_curve curve = best_theta(grid, model, 1.0, T, 1, seed);
    const double err = std::abs(curve.best_theta() - rho.value);
    report(10, err <= cell + 1e-12,
           "strength search recovers the closed-form optimum",
           fmt("theta*=%.6f closed-form=%.6f |diff|=%.2e cell=%.2e",
               curve.best_theta(), rho.value, err, cell));
}

// ---------------------------------------------------------------------------
// 11. Per-step noise preserves |return| clustering better than additive noise.

void criterion_clustering_preservation() {
    // Near-zero drift keeps the price level flat so neither scheme picks up
    // spurious slow structure from a trending denominator; 16 blocks of 50
    // keep the autocorrelation estimator's own noise well below the effect.
    const double c = 3.0;
    int wins = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        price_series s;
        s.prices = oracles::regime_switching_prices(
            4000 + static_cast<std::uint64_t>(trial), 16, 50, 0.0005, 0.005,
            0.03);
        const return_series ret = compute_returns(s);
        const double a_raw = oracles::lag1_abs_autocorr(ret.returns);
        const vol_estimate vol = estimate_volatility(ret, 20);

        const noise_source ns(6000 + static_cast<std::uint64_t>(trial));

        // Per-step scheme.
        augmentation_scheme prop;
        prop.kind = scheme_kind::proposed_multiplicative;
        prop.strength = c;
        substream np = ns.stream("per-step");
        const price_series zp = augment_prices(s, prop, &vol, np);

        // Additive scheme carrying the SAME total injected price variance.
        double mean_var = 0.0;
        const std::size_t n_ret = ret.size();
        for (std::size_t i = 0; i < s.prices.size(); ++i) {
            const std::size_t ri = std::min(i, n_ret - 1);
            const double sig = vol.sigma_hat[ri];
            mean_var += c * c * sig * sig * std::abs(ret.returns[ri]) *
                        s.prices[i] * s.prices[i];
        }
        mean_var /= static_cast<double>(s.prices.size());
        augmentation_scheme add;
        add.kind = scheme_kind::additive;
        add.strength = std::sqrt(mean_var);
        substream na = ns.stream("flat");
        const price_series za = augment_prices(s, add, nullptr, na);

        const auto noisy_returns = [&](const price_series& z) {
            std::vector<double> out(n_ret);
            for (std::size_t t = 0; t < n_ret; ++t)
                out[t] = noisified_return(z.prices[t + 1], z.prices[t],
                                          s.prices[t]);
            return out;
        };
        const double a_prop = oracles::lag1_abs_autocorr(noisy_returns(zp));
        const double a_add = oracles::lag1_abs_autocorr(noisy_returns(za));
        if (std::abs(a_prop - a_raw) < std::abs(a_add - a_raw)) ++wins;
    }
    report(11, wins >= 90,
           "per-step noise preserves |return| clustering better than flat",
           fmt("closer to raw in %d/%d trials (need >= 90)", wins, trials));
}

// ---------------------------------------------------------------------------
// 12. Multi-asset mean-variance solve residual.

void criterion_solve_residual() {
    const double lambda = 1.7;
    double worst = 0.0;
    for (const std::size_t dim : {2u, 3u, 5u, 8u, 13u, 21u, 34u, 50u}) {
        oracles::fixture_rng rng(8800 + dim);
        linalg::matrix A(dim, dim);
        for (double& v : A.a) v = rng.next_normal();
        linalg::matrix C(dim, dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < dim; ++k)
                    acc += A.at(k, i) * A.at(k, j);
                C.at(i, j) = acc + (i == j ? static_cast<double>(dim) : 0.0);
            }
        std::vector<double> g(dim);
        for (double& v : g) v = rng.next_normal();

        const markowitz_result res = markowitz_multi(g, C, lambda);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < dim; ++j)
                row += C.at(i, j) * res.weights[j];
            const double r = lambda * row - g[i];
            num += r * r;
            den += g[i] * g[i];
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    report(12, worst <= 1e-10, "multi-asset solve residual is at round-off",
           fmt("worst relative residual=%.2e over dims up to 50 (tol 1e-10)",
               worst));
}

}  // namespace

int main() {
    std::printf("acceptance gate\n===============\n");
    criterion_sign_utility();
    criterion_per_step_utility();
    criterion_scheme_ordering();
    criterion_strength_oracles();
    criterion_stationary_recovery();
    criterion_risk_equivalence();
    criterion_gradient_integrity();
    criterion_pipeline_ordering();
    criterion_sharpe_dispersion();
    criterion_search_recovery();
    criterion_clustering_preservation();
    criterion_solve_residual();
    if (g_failures == 0) {
        std::printf("all 12 criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
}
