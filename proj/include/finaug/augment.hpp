#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "finaug/linalg.hpp"
#include "finaug/procgen.hpp"
#include "finaug/rng.hpp"
#include "finaug/series.hpp"

// Noise-injection data augmentation for price/return series.
//
// Three schemes, all zero-mean per index:
//   additive:               z_i = S_i + rho * eps_i
//   naive-multiplicative:   z_i = S_i + rho0 * S_i * eps_i
//   proposed-multiplicative z_i = S_i + c * sqrt(sigma_hat_i^2 |r_i|) * S_i * eps_i
// plus the return-space variant r_i -> r_i + c sqrt(sigma_hat_i^2 |r_i|) eps_i.
//
// The closed-form optimal strengths divide by the drift and can prescribe
// infinite strength (whose fitted position is zero); that corner is carried
// as a distinguished `unbounded` flag, never as a float infinity.

namespace finaug {

enum class scheme_kind {
    none,
    additive,
    naive_multiplicative,
    proposed_multiplicative,
};

// Value-type scheme description.  `strength` is rho (price units) for
// additive, rho0 (dimensionless) for naive, c (dimensionless) for proposed.
// Noise is supplied per call as a substream so concurrent callers can key
// their own streams.
struct augmentation_scheme {
    scheme_kind kind = scheme_kind::none;
    double strength = 0.0;

    void validate() const;  // strength >= 0 and finite
};

// Trailing per-step volatility estimate aligned with a return series:
// sigma_hat[t] is the sample standard deviation of the `window` returns
// ending at t, with the first window-1 entries backfilled by the first
// computable value.
struct vol_estimate {
    std::vector<double> sigma_hat;
    std::size_t window = 0;
};

// A finite strength value or the theory's infinite-strength corner.
struct strength_value {
    double value = 0.0;
    bool unbounded = false;

    static strength_value finite(double v) { return {v, false}; }
    static strength_value infinite() { return {0.0, true}; }
};

// --- estimation ------------------------------------------------------------

// window >= 2 and len(returns) >= window required (window_too_large).
vol_estimate estimate_volatility(const return_series& returns,
                                 std::size_t window = 20);

// Moving average of |r| over the trailing tau values, truncated at the
// start: out[t] = mean(|r_{t-k}|, k = 0..min(t, tau-1)).
std::vector<double> smooth_abs_returns(const return_series& returns,
                                       std::size_t tau);

// --- augmentation ----------------------------------------------------------

// Perturb every price of the series under the scheme.  `vol` is required
// for the proposed scheme (must cover the series' return indices) and
// ignored otherwise.  The proposed scale at price index i uses the adjacent
// observed return r_i; the final price reuses the last available return.
// Augmented prices may legitimately cross zero — the output is NOT
// validated, and the noisified return below tolerates non-positive values.
price_series augment_prices(const price_series& series,
                            const augmentation_scheme& scheme,
                            const vol_estimate* vol, substream& noise);

// Return computed from perturbed prices with the ORIGINAL denominator:
// (z_next - z_t) / s_t.  Keeping the raw denominator keeps the perturbation
// mean-zero in return space.
double noisified_return(double z_next, double z_t, double s_t);

// Return-space augmentation of one window.  inputs are the L returns ending
// just before the target; target_index is the target's index in the source
// return series (so inputs[j] has absolute index target_index - L + j).
// Every element is perturbed independently with its own |r| scale; the
// target uses its own return magnitude.
struct augmented_window {
    std::vector<double> inputs;
    double target = 0.0;
};

augmented_window augment_return_window(std::span<const double> inputs,
                                       double target,
                                       std::size_t target_index, double c,
                                       const vol_estimate& vol,
                                       substream& noise);

// Multi-asset price perturbation: z_i = S_i + c sqrt(sum_j Sigma_ij |r_j| S_j^2) eps_i.
// Sigma must be symmetric positive semidefinite (not_psd / dimension_mismatch).
std::vector<double> multi_asset_noise(std::span<const double> prices,
                                      std::span<const double> returns,
                                      const linalg::matrix& Sigma, double c,
                                      substream& noise);

// --- closed-form optimal strengths ------------------------------------------

// All three require model.r > 0 (zero_drift otherwise).  Sums run over the
// series' return steps t, pairing r_t with the price S_t at the start of the
// step.
//
// additive: rho*^2 = (sigma^2 / 2r) * sum(r_t S_t^2)^2-terms ratio
//             = (sigma^2 / 2r) * [ sum_t (r_t S_t^2)^2 / sum_t r_t S_t^2 ],
//           unbounded when sum_t r_t S_t^2 <= 0; returns rho* itself.
strength_value optimal_additive_strength(const price_series& series,
                                         const gbm_params& model);

// naive: rho0*^2 = (sigma^2 / 2r) * sum_t r_t^2 / sum_t r_t,
//        unbounded when sum_t r_t <= 0; returns rho0* itself.
strength_value optimal_naive_strength(const price_series& series,
                                      const gbm_params& model);

// proposed, per step: gamma_t*^2 = (sigma^2 / 2r) * r_t S_t^2, unbounded for
// r_t < 0.  Returned as squared strengths (variance units) because the
// fitted-portfolio formula consumes gamma^2 directly.
std::vector<strength_value> optimal_proposed_strength_sq(
    const price_series& series, const gbm_params& model);

}  // namespace finaug
