#pragma once

#include <optional>
#include <span>
#include <vector>

#include "finaug/augment.hpp"
#include "finaug/linalg.hpp"
#include "finaug/procgen.hpp"
#include "finaug/series.hpp"

// Closed-form trading strategies: the raw sign strategy, the fitted
// maximizers under augmentation (per-step scale gamma_t^2), the stationary
// weight r/(lambda sigma^2), and the classical multi-asset mean-variance
// solution.

namespace finaug {

// Position bounds.  Theory verification uses `unbounded` (the proofs assume
// risk aversion keeps positions interior); backtests clip to [-1, 1], or
// [0, 1] when shorting is disallowed.
enum class box_constraint {
    unbounded,
    box_short,  // [-1, 1]
    long_only,  // [0, 1]
};

struct portfolio {
    std::vector<double> weights;  // pi_t, fraction of wealth per step
    box_constraint constraint = box_constraint::unbounded;
};

double clamp_weight(double w, box_constraint c);

// pi_t = +1 if r_t >= 0 else -1 (the tie r_t = 0 maps to +1).
portfolio sign_strategy(const return_series& returns);

// Fitted maximizer under per-step augmentation variance gamma_t^2:
//   pi_t = r_t S_t^2 / (2 lambda gamma_t^2),
// with unbounded gamma^2 producing the zero position, then the box applied.
// gamma_sq must cover every return step.
portfolio augmented_closed_form(const return_series& returns,
                                const price_series& prices, double lambda,
                                std::span<const strength_value> gamma_sq,
                                box_constraint constraint = box_constraint::unbounded);

// pi_t = (r / (lambda sigma^2)) * heaviside(r_t), heaviside(0) = 1 to match
// the sign strategy's tie rule.  Throws zero_volatility.
portfolio proposed_optimal_portfolio(const return_series& returns,
                                     const gbm_params& model, double lambda,
                                     box_constraint constraint = box_constraint::unbounded);

// The optimal stationary weight r / (lambda sigma^2).
double merton_stationary(const gbm_params& model, double lambda);

// Multi-asset mean-variance solution pi = (1/lambda) C^{-1} g, computed by
// Cholesky solve (never an explicit inverse).  in_sample_risk is
// (1/lambda^2) g^T C^{-1} g; when the true covariance is supplied the
// realized risk (1/lambda^2) g^T C^{-1} C_true C^{-1} g is reported too.
struct markowitz_result {
    std::vector<double> weights;
    double in_sample_risk = 0.0;
    std::optional<double> true_risk;
};

markowitz_result markowitz_multi(std::span<const double> g,
                                 const linalg::matrix& C, double lambda,
                                 const linalg::matrix* C_true = nullptr);

}  // namespace finaug
