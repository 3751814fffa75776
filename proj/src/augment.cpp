#include "finaug/augment.hpp"

#include <cmath>

#include "finaug/errors.hpp"
#include "finaug/simd/kernels.hpp"

namespace finaug {

void augmentation_scheme::validate() const {
    if (!(strength >= 0.0) || !std::isfinite(strength))
        throw invalid_parameter("augmentation strength must be finite and >= 0");
}

vol_estimate estimate_volatility(const return_series& returns,
                                 std::size_t window) {
    returns.validate();
    if (window < 2) throw invalid_parameter("volatility window must be >= 2");
    const std::size_t n = returns.size();
    if (n < window) throw window_too_large(window, n);

    vol_estimate out;
    out.window = window;
    out.sigma_hat.resize(n);
    for (std::size_t t = window - 1; t < n; ++t) {
        const double* seg = returns.returns.data() + (t + 1 - window);
        const double mean = simd::sum(seg, window) / static_cast<double>(window);
        // Sample variance (n-1 denominator) of the trailing window.
        double ss = 0.0;
        for (std::size_t k = 0; k < window; ++k) {
            const double d = seg[k] - mean;
            ss += d * d;
        }
        out.sigma_hat[t] = std::sqrt(ss / static_cast<double>(window - 1));
    }
    // Backfill the warm-up region with the first computable value.
    for (std::size_t t = 0; t + 1 < window; ++t)
        out.sigma_hat[t] = out.sigma_hat[window - 1];
    return out;
}

std::vector<double> smooth_abs_returns(const return_series& returns,
                                       std::size_t tau) {
    returns.validate();
    if (tau < 1) throw invalid_parameter("smoothing window must be >= 1");
    const std::size_t n = returns.size();
    std::vector<double> out(n);
    double running = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        running += std::abs(returns.returns[t]);
        if (t >= tau) running -= std::abs(returns.returns[t - tau]);
        const std::size_t count = t + 1 < tau ? t + 1 : tau;
        out[t] = running / static_cast<double>(count);
    }
    return out;
}

namespace {

// Per-price-index noise scale (standard deviation in price units).
// Return-dependent quantities at price index i use the adjacent observed
// return r_i; the final price has no outgoing return and reuses the last one.
double price_noise_sd(const price_series& series,
                      const return_series& returns,
                      const augmentation_scheme& scheme,
                      const vol_estimate* vol, std::size_t i) {
    switch (scheme.kind) {
        case scheme_kind::none:
            return 0.0;
        case scheme_kind::additive:
            return scheme.strength;
        case scheme_kind::naive_multiplicative:
            return scheme.strength * series.prices[i];
        case scheme_kind::proposed_multiplicative: {
            const std::size_t ri = i < returns.size() ? i : returns.size() - 1;
            const double sig = vol->sigma_hat[ri];
            const double scale =
                std::sqrt(sig * sig * std::abs(returns.returns[ri]));
            return scheme.strength * scale * series.prices[i];
        }
    }
    return 0.0;
}

}  // namespace

price_series augment_prices(const price_series& series,
                            const augmentation_scheme& scheme,
                            const vol_estimate* vol, substream& noise) {
    series.validate();
    scheme.validate();

    price_series out;
    out.label = series.label;
    out.prices = series.prices;
    if (scheme.kind == scheme_kind::none || scheme.strength == 0.0) return out;

    const return_series returns = compute_returns(series);
    if (scheme.kind == scheme_kind::proposed_multiplicative) {
        if (!vol)
            throw invalid_parameter(
                "proposed scheme requires a volatility estimate");
        if (vol->sigma_hat.size() < returns.size())
            throw length_mismatch(
                "volatility estimate does not cover the series");
    }

    for (std::size_t i = 0; i < out.prices.size(); ++i) {
        const double sd = price_noise_sd(series, returns, scheme, vol, i);
        if (sd > 0.0) out.prices[i] += sd * noise.next();
    }
    return out;
}

double noisified_return(double z_next, double z_t, double s_t) {
    if (!(s_t > 0.0)) throw invalid_parameter("denominator price must be > 0");
    return (z_next - z_t) / s_t;
}

augmented_window augment_return_window(std::span<const double> inputs,
                                       double target,
                                       std::size_t target_index, double c,
                                       const vol_estimate& vol,
                                       substream& noise) {
    const std::size_t L = inputs.size();
    if (target_index < L)
        throw length_mismatch("target index precedes the window");
    if (target_index >= vol.sigma_hat.size())
        throw length_mismatch("volatility estimate does not cover the window");

    augmented_window out;
    out.inputs.assign(inputs.begin(), inputs.end());
    out.target = target;
    if (c == 0.0) return out;

    const std::size_t base = target_index - L;
    for (std::size_t j = 0; j < L; ++j) {
        const double sig = vol.sigma_hat[base + j];
        const double sd = c * std::sqrt(sig * sig * std::abs(out.inputs[j]));
        if (sd > 0.0) out.inputs[j] += sd * noise.next();
    }
    const double sig_t = vol.sigma_hat[target_index];
    const double sd_t = c * std::sqrt(sig_t * sig_t * std::abs(target));
    if (sd_t > 0.0) out.target += sd_t * noise.next();
    return out;
}

std::vector<double> multi_asset_noise(std::span<const double> prices,
                                      std::span<const double> returns,
                                      const linalg::matrix& Sigma, double c,
                                      substream& noise) {
    const std::size_t n = prices.size();
    if (returns.size() != n || Sigma.rows != n || Sigma.cols != n)
        throw dimension_mismatch("prices, returns, covariance sizes disagree");
    linalg::check_psd(Sigma);

    std::vector<double> out(prices.begin(), prices.end());
    for (std::size_t i = 0; i < n; ++i) {
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            var += Sigma.at(i, j) * std::abs(returns[j]) * prices[j] * prices[j];
        // Tiny negative accumulations can occur for PSD-within-tolerance
        // inputs; clamp to zero rather than taking sqrt of a negative.
        const double sd = c * std::sqrt(var > 0.0 ? var : 0.0);
        if (sd > 0.0) out[i] += sd * noise.next();
    }
    return out;
}

namespace {

void require_positive_drift(const gbm_params& model) {
    model.validate();
    if (!(model.r > 0.0)) throw zero_drift();
}

}  // namespace

strength_value optimal_additive_strength(const price_series& series,
                                         const gbm_params& model) {
    require_positive_drift(model);
    const return_series returns = compute_returns(series);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        const double s = series.prices[t];
        const double a = returns.returns[t] * s * s;
        num += a * a;
        den += a;
    }
    if (!(den > 0.0)) return strength_value::infinite();
    const double rho_sq =
        model.sigma * model.sigma / (2.0 * model.r) * (num / den);
    return strength_value::finite(std::sqrt(rho_sq));
}

strength_value optimal_naive_strength(const price_series& series,
                                      const gbm_params& model) {
    require_positive_drift(model);
    const return_series returns = compute_returns(series);
    const double den = simd::sum(returns.returns.data(), returns.size());
    const double num = simd::sum_squares(returns.returns.data(), returns.size());
    if (!(den > 0.0)) return strength_value::infinite();
    const double rho0_sq =
        model.sigma * model.sigma / (2.0 * model.r) * (num / den);
    return strength_value::finite(std::sqrt(rho0_sq));
}

std::vector<strength_value> optimal_proposed_strength_sq(
    const price_series& series, const gbm_params& model) {
    require_positive_drift(model);
    const return_series returns = compute_returns(series);
    const double pref = model.sigma * model.sigma / (2.0 * model.r);
    std::vector<strength_value> out(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t) {
        const double r_t = returns.returns[t];
        const double s = series.prices[t];
        out[t] = r_t < 0.0 ? strength_value::infinite()
                           : strength_value::finite(pref * r_t * s * s);
    }
    return out;
}

}  // namespace finaug
