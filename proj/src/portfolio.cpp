#include "finaug/portfolio.hpp"

#include <algorithm>
#include <cmath>

#include "finaug/errors.hpp"
#include "finaug/simd/kernels.hpp"

namespace finaug {
namespace {

void require_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw invalid_parameter("risk aversion must be finite and > 0");
}

}  // namespace

double clamp_weight(double w, box_constraint c) {
    switch (c) {
        case box_constraint::unbounded: return w;
        case box_constraint::box_short: return std::clamp(w, -1.0, 1.0);
        case box_constraint::long_only: return std::clamp(w, 0.0, 1.0);
    }
    return w;
}

portfolio sign_strategy(const return_series& returns) {
    returns.validate();
    portfolio out;
    out.constraint = box_constraint::box_short;
    out.weights.resize(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t)
        out.weights[t] = returns.returns[t] >= 0.0 ? 1.0 : -1.0;
    return out;
}

portfolio augmented_closed_form(const return_series& returns,
                                const price_series& prices, double lambda,
                                std::span<const strength_value> gamma_sq,
                                box_constraint constraint) {
    require_lambda(lambda);
    returns.validate();
    prices.validate();
    if (returns.size() + 1 != prices.size())
        throw length_mismatch("returns do not match the price series");
    if (gamma_sq.size() < returns.size())
        throw length_mismatch("per-step scales do not cover the series");

    portfolio out;
    out.constraint = constraint;
    out.weights.resize(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t) {
        const double r_t = returns.returns[t];
        double w = 0.0;
        if (!gamma_sq[t].unbounded) {
            const double g2 = gamma_sq[t].value;
            const double s = prices.prices[t];
            if (g2 > 0.0) {
                w = r_t * s * s / (2.0 * lambda * g2);
            } else if (r_t != 0.0) {
                // Zero scale with a nonzero return prescribes an infinite
                // position; only a box constraint can make that meaningful.
                if (constraint == box_constraint::unbounded)
                    throw invalid_parameter(
                        "zero augmentation scale with nonzero return needs a "
                        "position box");
                w = r_t > 0.0 ? 1.0 : -1.0;
            }
        }
        out.weights[t] = clamp_weight(w, constraint);
    }
    return out;
}

portfolio proposed_optimal_portfolio(const return_series& returns,
                                     const gbm_params& model, double lambda,
                                     box_constraint constraint) {
    require_lambda(lambda);
    model.validate();
    if (!(model.sigma > 0.0)) throw zero_volatility();
    returns.validate();

    const double stationary = model.r / (lambda * model.sigma * model.sigma);
    portfolio out;
    out.constraint = constraint;
    out.weights.resize(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t) {
        const double w = returns.returns[t] >= 0.0 ? stationary : 0.0;
        out.weights[t] = clamp_weight(w, constraint);
    }
    return out;
}

double merton_stationary(const gbm_params& model, double lambda) {
    require_lambda(lambda);
    model.validate();
    if (!(model.sigma > 0.0)) throw zero_volatility();
    return model.r / (lambda * model.sigma * model.sigma);
}

markowitz_result markowitz_multi(std::span<const double> g,
                                 const linalg::matrix& C, double lambda,
                                 const linalg::matrix* C_true) {
    require_lambda(lambda);
    const std::size_t n = g.size();
    if (C.rows != n || C.cols != n)
        throw dimension_mismatch("mean vector and covariance sizes disagree");
    if (!linalg::is_symmetric(C, 1e-10))
        throw singular_covariance("covariance matrix is not symmetric");
    if (C_true && (C_true->rows != n || C_true->cols != n))
        throw dimension_mismatch("true covariance size disagrees");

    linalg::matrix L(0, 0);
    try {
        L = linalg::cholesky(C);
    } catch (const not_psd& e) {
        throw singular_covariance(std::string("covariance not positive definite: ") +
                                  e.what());
    }
    constexpr double kMaxCondition = 1e12;
    if (n > 1 && linalg::condition_spd(C, L) > kMaxCondition)
        throw singular_covariance("covariance condition number exceeds 1e12");

    // x = C^{-1} g; weights = x / lambda.  Both risk numbers are quadratic
    // forms in the same x so the estimator-consistency identity
    // (C_true == C  =>  in-sample == realized) holds bit for bit.
    const std::vector<double> x = linalg::cholesky_solve(L, g);
    markowitz_result out;
    out.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.weights[i] = x[i] / lambda;

    const double lam_sq = lambda * lambda;
    out.in_sample_risk = linalg::quadratic_form(x, C, x) / lam_sq;
    if (C_true)
        out.true_risk = linalg::quadratic_form(x, *C_true, x) / lam_sq;
    return out;
}

}  // namespace finaug
