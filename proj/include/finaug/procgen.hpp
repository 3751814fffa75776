#pragma once

#include <cstdint>
#include <vector>

#include "finaug/rng.hpp"
#include "finaug/series.hpp"

// Synthetic market generators: a discrete multiplicative random walk with
// constant volatility, and a stochastic-volatility extension whose variance
// mean-reverts.  Both are deterministic given (params, T, seed, trajectory
// index); each trajectory owns its own noise substream so batches can be
// produced in any order without changing any path.

namespace finaug {

// Constant-volatility walk S_{t+1} = (1+r)S_t + sigma S_t eta_t.
struct gbm_params {
    double s0 = 1.0;     // initial price, > 0
    double r = 0.005;    // per-step expected return
    double sigma = 0.01; // per-step volatility, >= 0

    void validate() const;
};

// Stochastic-volatility walk: the instantaneous variance nu_t follows its
// own mean-reverting process.  dt defaults to 1 to match the discrete-time
// setting used everywhere else.
struct heston_params {
    double s0 = 1.0;
    double r = 0.005;
    double nu0 = 1e-4;  // initial instantaneous variance, >= 0
    double kappa = 0.25; // mean-reversion rate, >= 0
    double theta = 4e-4; // long-run variance, >= 0
    double xi = 0.1;    // volatility of variance, >= 0
    double rho = 0.0;   // corr(price shock, variance shock), in [-1, 1]
    double dt = 1.0;    // step size, > 0

    void validate() const;
};

struct heston_path {
    price_series prices;
    std::vector<double> variance;  // nu_0 ... nu_T (length T+1)
};

// Simulate T steps; the result holds T+1 prices.  Throws
// non_positive_price if a draw pushes the price to zero or below (the
// generators refuse to clamp silently — a clamped path would bias every
// utility estimate downstream).
price_series simulate_gbm(const gbm_params& params, std::size_t T,
                          const noise_source& noise,
                          std::uint64_t trajectory = 0);

// Full-truncation discretization:
//   nu_{t+1} = nu_t + kappa (theta - nu_t^+) dt + xi sqrt(nu_t^+ dt) dW_nu
//   S_{t+1}  = (1 + r dt) S_t + sqrt(nu_t^+ dt) S_t dW_S
// with nu^+ = max(nu, 0) and corr(dW_S, dW_nu) = rho.  When xi == 0 the
// variance shock is never drawn, so the price-shock stream is consumed
// exactly as simulate_gbm consumes its stream; with kappa == xi == 0 and
// nu0 = sigma^2 the price path equals the constant-volatility path bit for
// bit.
heston_path simulate_heston(const heston_params& params, std::size_t T,
                            const noise_source& noise,
                            std::uint64_t trajectory = 0);

// Convenience batch: trajectories 0..n-1.
std::vector<price_series> simulate_gbm_batch(const gbm_params& params,
                                             std::size_t T, std::size_t n,
                                             const noise_source& noise);

}  // namespace finaug
