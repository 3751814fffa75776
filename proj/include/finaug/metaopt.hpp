#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "finaug/augment.hpp"
#include "finaug/procgen.hpp"
#include "finaug/utility.hpp"

// Choosing the augmentation strength theta by maximizing the expected
// generalization utility V(theta) of the strategy fitted under theta.
// Grid search with common random numbers: every theta is evaluated on the
// same simulated training sets, so the argmax is stable and reproducible
// bit for bit for a given seed.

namespace finaug {

struct theta_grid {
    std::vector<double> values;  // candidate strengths, >= 0, finite
    scheme_kind kind = scheme_kind::additive;

    void validate() const;
};

// Finite prior over model parameters (r, sigma) pairs carried as full
// parameter sets; weights are nonnegative and sum to 1.
struct omega_prior {
    std::vector<gbm_params> support;
    std::vector<double> weights;

    void validate() const;
};

struct theta_curve {
    std::vector<double> theta;
    std::vector<double> value;  // V(theta)
    std::vector<double> se;
    std::size_t best_index = 0;

    double best_theta() const { return theta[best_index]; }
};

// V(theta, model) estimator.  Injectable so tests can pin hand-built value
// matrices; the default is the Monte Carlo evaluator below.
using theta_evaluator =
    std::function<utility_report(double theta, const gbm_params& model)>;

// Default evaluator: simulate n_train_sets training series from `model`
// (keyed by seed and set index only — common random numbers across theta),
// fit the closed-form strategy under strength theta, and average the exact
// generalization utility.  Theta's meaning per scheme: additive rho, naive
// rho0, proposed a multiplicative factor on the per-series optimal
// per-step strengths.
theta_evaluator make_fitted_evaluator(scheme_kind kind, double lambda,
                                      std::size_t T, std::size_t n_train_sets,
                                      std::uint64_t seed);

// Grid search; ties break toward smaller theta (weaker augmentation).
theta_curve best_theta(const theta_grid& grid, const gbm_params& model,
                       double lambda, std::size_t T, std::size_t n_train_sets,
                       std::uint64_t seed);
theta_curve best_theta_with(const theta_grid& grid, const gbm_params& model,
                            const theta_evaluator& eval);

// V averaged over the prior (zero-weight support points are skipped).
theta_curve bayes_theta(const theta_grid& grid, const omega_prior& prior,
                        double lambda, std::size_t T, std::size_t n_train_sets,
                        std::uint64_t seed);
theta_curve bayes_theta_with(const theta_grid& grid, const omega_prior& prior,
                             const theta_evaluator& eval);

// max over theta of (min over the omega set of V).
theta_curve minimax_theta(const theta_grid& grid,
                          std::span<const gbm_params> omegas, double lambda,
                          std::size_t T, std::size_t n_train_sets,
                          std::uint64_t seed);
theta_curve minimax_theta_with(const theta_grid& grid,
                               std::span<const gbm_params> omegas,
                               const theta_evaluator& eval);

}  // namespace finaug
