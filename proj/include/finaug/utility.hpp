#pragma once

#include <cstddef>
#include <functional>

#include "finaug/augment.hpp"
#include "finaug/portfolio.hpp"
#include "finaug/procgen.hpp"
#include "finaug/rng.hpp"
#include "finaug/series.hpp"

// Mean-variance utilities.
//
// Two variance conventions coexist deliberately:
//   * the TRAINING objective penalizes lambda * Var per step (empirical_utility);
//   * the GENERALIZATION utilities penalize (lambda/2) * Var (inner utilities
//     and every closed form below).
// The factor-of-two split follows the source conventions for each quantity;
// the closed-form constants verified in the tests are only correct with this
// pairing, so do not "unify" them.

namespace finaug {

// Standard normal CDF, accurate to double precision.
double normal_cdf(double x);

struct utility_report {
    double value = 0.0;      // gain_term - risk_term, maintained exactly
    double gain_term = 0.0;  // mean wealth-return component
    double risk_term = 0.0;  // variance penalty component
    double se = 0.0;         // standard error of `value` (MC only, else 0)
};

utility_report make_utility_report(double gain, double risk, double se = 0.0);

// --- training (empirical) utility -------------------------------------------

// (1/T) sum_t [ E_t[G_t] - lambda * Var_t[G_t] ] where G_t = pi_t * r~_t and
// the expectation runs over the augmentation noise, estimated with n_draws
// full-series redraws.  scheme none is exact (variance identically zero).
// `vol` is required for the proposed scheme.  Portfolio length must equal
// the return count (= len(prices) - 1).
utility_report empirical_utility(const portfolio& strategy,
                                 const price_series& prices,
                                 const augmentation_scheme& scheme,
                                 const vol_estimate* vol, double lambda,
                                 std::size_t n_draws, substream& noise);

// --- generalization (true) utility -------------------------------------------

// Exact per-strategy utility under the constant-volatility model, using the
// i.i.d.-normal structure of future returns:
//   (r/T) sum_t pi_t  -  (lambda sigma^2 / 2T) sum_t pi_t^2.
utility_report inner_utility_exact(const portfolio& strategy,
                                   const gbm_params& model, double lambda);

// Same quantity estimated from n_test sampled future-return trajectories;
// exists to validate the exact shortcut above.
utility_report inner_utility_sampled(const portfolio& strategy,
                                     const gbm_params& model, double lambda,
                                     std::size_t n_test,
                                     const noise_source& noise);

// Closed forms (se = 0):
//   sign strategy:  [1 - 2 Phi(-r/sigma)] r - lambda sigma^2 / 2
//   fitted proposed-strength strategy:  r^2 / (2 lambda sigma^2) * Phi(r/sigma)
utility_report true_utility_no_aug(const gbm_params& model, double lambda);
utility_report true_utility_proposed(const gbm_params& model, double lambda);

// Per-training-series factor appearing in the additive-scheme utility:
//   (sum_t r_t S_t^2)^2 / sum_t (r_t S_t^2)^2   if sum_t r_t S_t^2 > 0,
//   0 otherwise.
// Bounded above by T (Cauchy-Schwarz).
double additive_utility_bracket(const price_series& series);

// Additive-scheme true utility r^2/(2 lambda sigma^2 T) * E[bracket], where
// the expectation over training series has no closed form and is estimated
// over n_train_sets simulated trajectories.  Reports mean and SE.
utility_report true_utility_additive(const gbm_params& model, double lambda,
                                     std::size_t T, std::size_t n_train_sets,
                                     const noise_source& noise);

// --- Monte Carlo over training sets -------------------------------------------

// Builds a strategy from each simulated training series and averages its
// generalization utility.  n_test_sets == 0 uses the exact inner utility;
// otherwise the inner utility is itself sampled (slower; used to validate
// the shortcut).  Training trajectories are keyed only by (seed, set index),
// so two calls with the same seed see identical training sets regardless of
// the strategy being evaluated — common random numbers for comparisons.
using strategy_builder =
    std::function<portfolio(const price_series&, const return_series&)>;

utility_report true_utility_mc(const strategy_builder& builder,
                               const gbm_params& model, double lambda,
                               std::size_t T, std::size_t n_train_sets,
                               std::size_t n_test_sets,
                               const noise_source& noise);

}  // namespace finaug
