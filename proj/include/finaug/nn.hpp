#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "finaug/augment.hpp"
#include "finaug/rng.hpp"
#include "finaug/series.hpp"

// Feedforward policy network pi = f(window of returns) trained to maximize
// the mean-variance training objective, with three interchangeable loss
// modes:
//
//   sampled_aug      estimate per-step mean and variance of the wealth
//                    return directly from noise draws on inputs AND target;
//   eq13_regularized single input-noise draw for the gain term plus the
//                    closed-form output penalty lambda * kappa_t * pi_t^2,
//                    kappa_t = c^2 sigma_hat_t^2 |r_hat_t| with |r_hat| the
//                    tau-smoothed return magnitude;
//   full_three_term  input draws with the variance split into the
//                    input-uncertainty part lambda r_t^2 Var[pi] and the
//                    future-price part lambda kappa_t E[pi^2].
//
// Everything is deterministic given the config seed: initialization,
// minibatch selection, and noise draws all flow from named substreams, and
// the numeric kernels guarantee platform-independent arithmetic.

namespace finaug {

enum class output_head {
    identity,  // raw linear output (theory fixtures)
    box_sym,   // squashed into [-1, 1] (shorting allowed)
    box_long,  // squashed into [0, 1] (long-only)
};

enum class objective_mode {
    sampled_aug,
    eq13_regularized,
    full_three_term,
};

struct mlp_model {
    std::vector<std::size_t> sizes;      // e.g. {10, 64, 64, 1}
    std::vector<std::vector<double>> W;  // per layer, row-major [out][in]
    std::vector<std::vector<double>> b;  // per layer
    output_head head = output_head::identity;
    double input_scale = 1.0;  // inputs are divided by this before layer 0

    std::size_t input_size() const { return sizes.front(); }
    std::size_t layer_count() const { return sizes.size() - 1; }
    void validate() const;  // finite parameters, consistent shapes
};

// Seeded initialization: hidden weights scaled for the rectifier
// (sd sqrt(2/fan_in)), biases zero.
mlp_model make_mlp(std::vector<std::size_t> sizes, output_head head,
                   std::uint64_t seed, double input_scale = 1.0);

// Single forward pass.  Throws size_mismatch when the window length does
// not match the input layer.
double forward(const mlp_model& model, std::span<const double> window);

struct train_config {
    double lambda = 1.0;        // risk aversion (>= 0; 0 disables the penalty)
    double c = 0.0;             // augmentation strength multiplier
    objective_mode objective = objective_mode::eq13_regularized;
    std::size_t minibatch = 64;
    std::size_t steps = 2000;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    double weight_decay = 0.0;  // coupled L2 on weights (not biases)
    std::size_t tau = 20;       // |r| smoothing window for the penalty scale
    std::size_t n_draws = 8;    // noise draws (sampled_aug / full_three_term)
    // Moment decay and epsilon of the adaptive optimizer.
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

// Flat per-element training arrays.  input_sd/target_sd are per-element
// noise standard deviations in return units; penalty_scale is the
// variance-unit coefficient kappa_t multiplying lambda * pi^2 in the
// regularized modes.  penalty_scale entries may be negative: the
// theory-verification path feeds signed per-step scales whose SUM is
// positive (the stationary fixture), while the practical path always
// produces nonnegative values.
struct train_arrays {
    std::size_t n = 0;
    std::size_t L = 0;
    std::vector<double> inputs;         // n * L
    std::vector<double> targets;        // n
    std::vector<double> input_sd;       // n * L
    std::vector<double> target_sd;      // n
    std::vector<double> penalty_scale;  // n

    void validate() const;
};

// Build arrays for the proposed scheme from a return-space window dataset:
// per-element sd c*sqrt(sigma_hat^2 |r|), target sd from its own return,
// penalty kappa = c^2 sigma_hat^2 |r_hat| at the target index with |r_hat|
// smoothed over cfg.tau.  `returns` must be the series the windows came
// from; `vol` must align with it.
train_arrays prepare_training_arrays(const window_dataset& ds,
                                     const return_series& returns,
                                     const vol_estimate& vol,
                                     const train_config& cfg);

struct mlp_gradient {
    std::vector<std::vector<double>> W;
    std::vector<std::vector<double>> b;
};

mlp_gradient zero_gradient(const mlp_model& model);

struct loss_terms {
    double loss = 0.0;  // -(gain - risk); minimized
    double gain = 0.0;
    double risk = 0.0;
};

// Number of standard-normal draws one loss evaluation consumes for a batch
// of `n` elements (layouts documented in the implementation).
std::size_t loss_noise_count(objective_mode mode, std::size_t n,
                             std::size_t L, std::size_t n_draws);

// Evaluate the loss on the selected batch rows using pre-drawn noise.
// Passing the noise explicitly makes the loss a deterministic function of
// the parameters, which the finite-difference gradient tests rely on.
loss_terms loss_eval(const mlp_model& model, const train_arrays& data,
                     std::span<const std::size_t> batch,
                     const train_config& cfg, std::span<const double> noise);

// Same, plus the analytic gradient (accumulated into `grad`, which must be
// zero-initialized with matching shapes).
loss_terms loss_and_gradient(const mlp_model& model, const train_arrays& data,
                             std::span<const std::size_t> batch,
                             const train_config& cfg,
                             std::span<const double> noise,
                             mlp_gradient& grad);

struct train_result {
    mlp_model model;
    std::vector<double> loss_trace;  // one entry per step
};

// Seeded minibatch training with the adaptive-moment optimizer.  When
// `init` is null the model is initialized from cfg.seed with the given
// sizes/head.  Throws non_finite_loss if the loss leaves the reals.
train_result train_on_arrays(const train_arrays& data,
                             const train_config& cfg,
                             std::vector<std::size_t> sizes,
                             output_head head, double input_scale,
                             const mlp_model* init = nullptr);

// Convenience wrapper: proposed-scheme arrays from a window dataset.
train_result train(const window_dataset& ds, const return_series& returns,
                   const vol_estimate& vol, const train_config& cfg,
                   std::vector<std::size_t> sizes, output_head head);

// JSON checkpoint with an architecture header; stable key order.
void save_checkpoint(const mlp_model& model, const std::filesystem::path& path);
mlp_model load_checkpoint(const std::filesystem::path& path);

}  // namespace finaug
