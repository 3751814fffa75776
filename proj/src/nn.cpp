#include "finaug/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "finaug/errors.hpp"
#include "finaug/simd/kernels.hpp"

namespace finaug {
namespace {

double apply_head(output_head head, double y) {
    switch (head) {
        case output_head::identity: return y;
        case output_head::box_sym: return std::tanh(y);
        case output_head::box_long: return 1.0 / (1.0 + std::exp(-y));
    }
    return y;
}

// d(head)/dy expressed through the head output value.
double head_derivative(output_head head, double pi) {
    switch (head) {
        case output_head::identity: return 1.0;
        case output_head::box_sym: return 1.0 - pi * pi;
        case output_head::box_long: return pi * (1.0 - pi);
    }
    return 1.0;
}

// Scratch space for one forward/backward pass, reused across batch rows.
struct workspace {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> act;   // post-activation per layer (act[0] = scaled input)
    std::vector<std::vector<double>> delta; // backprop buffers

    explicit workspace(const mlp_model& m) {
        const std::size_t layers = m.layer_count();
        pre.resize(layers);
        delta.resize(layers);
        act.resize(layers + 1);
        act[0].resize(m.sizes[0]);
        for (std::size_t l = 0; l < layers; ++l) {
            pre[l].resize(m.sizes[l + 1]);
            delta[l].resize(m.sizes[l + 1]);
            act[l + 1].resize(m.sizes[l + 1]);
        }
    }
};

// Forward pass through the layers; returns the head output.
double forward_into(const mlp_model& m, workspace& ws,
                    const double* window, const double* noise_sd,
                    const double* noise) {
    const std::size_t L = m.sizes[0];
    const double inv_scale = 1.0 / m.input_scale;
    for (std::size_t j = 0; j < L; ++j) {
        double x = window[j];
        if (noise_sd) x += noise_sd[j] * noise[j];
        ws.act[0][j] = x * inv_scale;
    }
    const std::size_t layers = m.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t rows = m.sizes[l + 1];
        const std::size_t cols = m.sizes[l];
        simd::gemv(m.W[l].data(), ws.act[l].data(), m.b[l].data(),
                   ws.pre[l].data(), rows, cols);
        // Final layer stays linear; the head is applied to its scalar output.
        if (l + 1 < layers)
            simd::relu(ws.pre[l].data(), ws.act[l + 1].data(), rows);
    }
    return apply_head(m.head, ws.pre[layers - 1][0]);
}

// Backprop of d(loss)/d(pi) = seed through the net; accumulates into grad.
void backward_accumulate(const mlp_model& m, workspace& ws, double pi,
                         double seed, mlp_gradient& grad) {
    const std::size_t layers = m.layer_count();
    ws.delta[layers - 1][0] = seed * head_derivative(m.head, pi);
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t rows = m.sizes[l + 1];
        const std::size_t cols = m.sizes[l];
        // Parameter gradients for this layer.
        for (std::size_t o = 0; o < rows; ++o) {
            const double d = ws.delta[l][o];
            if (d != 0.0)
                simd::axpy(d, ws.act[l].data(), grad.W[l].data() + o * cols,
                           cols);
        }
        simd::axpy(1.0, ws.delta[l].data(), grad.b[l].data(), rows);
        if (l == 0) break;
        // delta_{l-1} = (W_l^T delta_l) * relu'(pre_{l-1})
        std::fill(ws.delta[l - 1].begin(), ws.delta[l - 1].end(), 0.0);
        simd::gemv_transpose_acc(m.W[l].data(), ws.delta[l].data(),
                                 ws.delta[l - 1].data(), rows, cols);
        for (std::size_t j = 0; j < cols; ++j)
            if (ws.pre[l - 1][j] <= 0.0) ws.delta[l - 1][j] = 0.0;
    }
}

}  // namespace

void mlp_model::validate() const {
    if (sizes.size() < 2)
        throw invalid_parameter("model needs an input and an output layer");
    if (sizes.back() != 1)
        throw invalid_parameter("output layer must be scalar");
    if (W.size() != layer_count() || b.size() != layer_count())
        throw size_mismatch("parameter containers do not match layer count");
    if (!(input_scale > 0.0) || !std::isfinite(input_scale))
        throw invalid_parameter("input scale must be finite and > 0");
    for (std::size_t l = 0; l < layer_count(); ++l) {
        if (W[l].size() != sizes[l + 1] * sizes[l] || b[l].size() != sizes[l + 1])
            throw size_mismatch("parameter shapes do not match layer sizes");
        for (const double w : W[l])
            if (!std::isfinite(w)) throw non_finite_value("model weights");
        for (const double bb : b[l])
            if (!std::isfinite(bb)) throw non_finite_value("model biases");
    }
}

mlp_model make_mlp(std::vector<std::size_t> sizes, output_head head,
                   std::uint64_t seed, double input_scale) {
    mlp_model m;
    m.sizes = std::move(sizes);
    m.head = head;
    m.input_scale = input_scale;
    if (m.sizes.size() < 2)
        throw invalid_parameter("model needs an input and an output layer");
    const noise_source source(seed);
    m.W.resize(m.layer_count());
    m.b.resize(m.layer_count());
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const std::size_t fan_in = m.sizes[l];
        const std::size_t fan_out = m.sizes[l + 1];
        m.W[l].resize(fan_out * fan_in);
        m.b[l].assign(fan_out, 0.0);
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        substream s = source.stream("init", l);
        for (double& w : m.W[l]) w = sd * s.next_standard_normal();
    }
    m.validate();
    return m;
}

double forward(const mlp_model& model, std::span<const double> window) {
    if (window.size() != model.input_size())
        throw size_mismatch("window length does not match model input size");
    workspace ws(model);
    return forward_into(model, ws, window.data(), nullptr, nullptr);
}

void train_config::validate() const {
    if (!(learning_rate >= 0.0)) throw invalid_parameter("learning rate must be >= 0");
    if (steps < 1) throw invalid_parameter("need at least one training step");
    if (minibatch < 1) throw invalid_parameter("minibatch must be >= 1");
    if (!(lambda >= 0.0)) throw invalid_parameter("risk aversion must be >= 0");
    if (!(c >= 0.0)) throw invalid_parameter("augmentation strength must be >= 0");
    if (tau < 1) throw invalid_parameter("smoothing window must be >= 1");
    if (objective != objective_mode::eq13_regularized && n_draws < 2)
        throw invalid_parameter("sampling modes need at least two draws");
    if (!(weight_decay >= 0.0)) throw invalid_parameter("weight decay must be >= 0");
}

void train_arrays::validate() const {
    if (n == 0) throw empty_batch();
    if (inputs.size() != n * L || targets.size() != n ||
        input_sd.size() != n * L || target_sd.size() != n ||
        penalty_scale.size() != n)
        throw size_mismatch("training array shapes disagree");
}

train_arrays prepare_training_arrays(const window_dataset& ds,
                                     const return_series& returns,
                                     const vol_estimate& vol,
                                     const train_config& cfg) {
    cfg.validate();
    if (ds.mode != window_dataset::space::ret)
        throw invalid_parameter("training expects return-space windows");
    if (vol.sigma_hat.size() != returns.size())
        throw length_mismatch("volatility estimate does not align with returns");

    const std::vector<double> smooth = smooth_abs_returns(returns, cfg.tau);

    train_arrays out;
    out.n = ds.count;
    out.L = ds.window_len;
    out.inputs = ds.inputs;
    out.targets = ds.targets;
    out.input_sd.resize(out.n * out.L);
    out.target_sd.resize(out.n);
    out.penalty_scale.resize(out.n);
    for (std::size_t i = 0; i < out.n; ++i) {
        const std::size_t tgt = ds.target_index[i];
        const std::size_t base = tgt - out.L;
        for (std::size_t j = 0; j < out.L; ++j) {
            const double sig = vol.sigma_hat[base + j];
            const double r = ds.inputs[i * out.L + j];
            out.input_sd[i * out.L + j] =
                cfg.c * std::sqrt(sig * sig * std::abs(r));
        }
        const double sig_t = vol.sigma_hat[tgt];
        out.target_sd[i] =
            cfg.c * std::sqrt(sig_t * sig_t * std::abs(ds.targets[i]));
        out.penalty_scale[i] = cfg.c * cfg.c * sig_t * sig_t * smooth[tgt];
    }
    return out;
}

mlp_gradient zero_gradient(const mlp_model& model) {
    mlp_gradient g;
    g.W.resize(model.layer_count());
    g.b.resize(model.layer_count());
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        g.W[l].assign(model.W[l].size(), 0.0);
        g.b[l].assign(model.b[l].size(), 0.0);
    }
    return g;
}

// Noise layouts, in draw-major order:
//   eq13_regularized : n * L                      (one input draw)
//   sampled_aug      : n_draws * (n * L + n)      (input block, then target block)
//   full_three_term  : n_draws * (n * L)          (input draws only)
std::size_t loss_noise_count(objective_mode mode, std::size_t n,
                             std::size_t L, std::size_t n_draws) {
    switch (mode) {
        case objective_mode::eq13_regularized: return n * L;
        case objective_mode::sampled_aug: return n_draws * (n * L + n);
        case objective_mode::full_three_term: return n_draws * n * L;
    }
    return 0;
}

namespace {

struct eval_context {
    const mlp_model& model;
    const train_arrays& data;
    std::span<const std::size_t> batch;
    const train_config& cfg;
    std::span<const double> noise;
    mlp_gradient* grad;  // null for evaluation-only
};

loss_terms run_eq13(const eval_context& ctx) {
    const auto& [model, data, batch, cfg, noise, grad] = ctx;
    const std::size_t n = batch.size();
    const std::size_t L = data.L;
    workspace ws(model);
    const double inv_n = 1.0 / static_cast<double>(n);

    double gain = 0.0, risk = 0.0;
    for (std::size_t bi = 0; bi < n; ++bi) {
        const std::size_t i = batch[bi];
        const double* x = data.inputs.data() + i * L;
        const double* sd = cfg.c > 0.0 ? data.input_sd.data() + i * L : nullptr;
        const double* eps = noise.data() + bi * L;
        const double pi = forward_into(model, ws, x, sd, eps);
        const double r = data.targets[i];
        const double kappa = data.penalty_scale[i];
        gain += pi * r;
        risk += cfg.lambda * kappa * pi * pi;
        if (grad) {
            // d(loss)/d(pi) = -(r - 2 lambda kappa pi) / n
            const double seed = -inv_n * (r - 2.0 * cfg.lambda * kappa * pi);
            backward_accumulate(model, ws, pi, seed, *grad);
        }
    }
    gain *= inv_n;
    risk *= inv_n;
    return {-(gain - risk), gain, risk};
}

loss_terms run_sampled(const eval_context& ctx) {
    const auto& [model, data, batch, cfg, noise, grad] = ctx;
    const std::size_t n = batch.size();
    const std::size_t L = data.L;
    const std::size_t D = cfg.n_draws;
    const std::size_t block = n * L + n;  // per-draw noise block
    workspace ws(model);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double Df = static_cast<double>(D);

    // First pass: wealth returns G[i][d] (and noisy targets for the
    // gradient pass).
    std::vector<double> G(n * D), r_noisy(n * D);
    for (std::size_t d = 0; d < D; ++d) {
        const double* in_eps = noise.data() + d * block;
        const double* tg_eps = in_eps + n * L;
        for (std::size_t bi = 0; bi < n; ++bi) {
            const std::size_t i = batch[bi];
            const double pi =
                forward_into(model, ws, data.inputs.data() + i * L,
                             cfg.c > 0.0 ? data.input_sd.data() + i * L : nullptr,
                             in_eps + bi * L);
            const double rt = data.targets[i] + data.target_sd[i] * tg_eps[bi];
            G[bi * D + d] = pi * rt;
            r_noisy[bi * D + d] = rt;
        }
    }

    double gain = 0.0, risk = 0.0;
    std::vector<double> mean(n);
    for (std::size_t bi = 0; bi < n; ++bi) {
        const double m = simd::sum(G.data() + bi * D, D) / Df;
        mean[bi] = m;
        double ss = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            const double dev = G[bi * D + d] - m;
            ss += dev * dev;
        }
        gain += m;
        risk += cfg.lambda * ss / (Df - 1.0);
    }
    gain *= inv_n;
    risk *= inv_n;

    if (grad) {
        // d(loss)/d(pi_{i,d}) =
        //   -(1/n) [ r~/D - lambda * 2 (G - mean) r~ / (D-1) ]
        for (std::size_t d = 0; d < D; ++d) {
            const double* in_eps = noise.data() + d * block;
            for (std::size_t bi = 0; bi < n; ++bi) {
                const std::size_t i = batch[bi];
                const double pi = forward_into(
                    model, ws, data.inputs.data() + i * L,
                    cfg.c > 0.0 ? data.input_sd.data() + i * L : nullptr,
                    in_eps + bi * L);
                const double rt = r_noisy[bi * D + d];
                const double dev = G[bi * D + d] - mean[bi];
                const double seed =
                    -inv_n * (rt / Df -
                              cfg.lambda * 2.0 * dev * rt / (Df - 1.0));
                backward_accumulate(model, ws, pi, seed, *grad);
            }
        }
    }
    return {-(gain - risk), gain, risk};
}

loss_terms run_full(const eval_context& ctx) {
    const auto& [model, data, batch, cfg, noise, grad] = ctx;
    const std::size_t n = batch.size();
    const std::size_t L = data.L;
    const std::size_t D = cfg.n_draws;
    workspace ws(model);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double Df = static_cast<double>(D);

    std::vector<double> pis(n * D);
    for (std::size_t d = 0; d < D; ++d) {
        const double* in_eps = noise.data() + d * (n * L);
        for (std::size_t bi = 0; bi < n; ++bi) {
            const std::size_t i = batch[bi];
            pis[bi * D + d] = forward_into(
                model, ws, data.inputs.data() + i * L,
                cfg.c > 0.0 ? data.input_sd.data() + i * L : nullptr,
                in_eps + bi * L);
        }
    }

    double gain = 0.0, risk = 0.0;
    std::vector<double> mean(n), mean_sq(n);
    for (std::size_t bi = 0; bi < n; ++bi) {
        const std::size_t i = batch[bi];
        const double m = simd::sum(pis.data() + bi * D, D) / Df;
        const double msq = simd::sum_squares(pis.data() + bi * D, D) / Df;
        mean[bi] = m;
        mean_sq[bi] = msq;
        double ss = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            const double dev = pis[bi * D + d] - m;
            ss += dev * dev;
        }
        const double var_pi = ss / (Df - 1.0);
        const double r = data.targets[i];
        gain += m * r;
        risk += cfg.lambda *
                (r * r * var_pi + data.penalty_scale[i] * msq);
    }
    gain *= inv_n;
    risk *= inv_n;

    if (grad) {
        // d(loss)/d(pi_{i,d}) = -(1/n) [ r/D
        //   - lambda ( r^2 2(pi - mean)/(D-1) + kappa 2 pi / D ) ]
        for (std::size_t d = 0; d < D; ++d) {
            const double* in_eps = noise.data() + d * (n * L);
            for (std::size_t bi = 0; bi < n; ++bi) {
                const std::size_t i = batch[bi];
                const double pi = forward_into(
                    model, ws, data.inputs.data() + i * L,
                    cfg.c > 0.0 ? data.input_sd.data() + i * L : nullptr,
                    in_eps + bi * L);
                const double r = data.targets[i];
                const double dev = pi - mean[bi];
                const double seed =
                    -inv_n *
                    (r / Df -
                     cfg.lambda * (r * r * 2.0 * dev / (Df - 1.0) +
                                   data.penalty_scale[i] * 2.0 * pi / Df));
                backward_accumulate(model, ws, pi, seed, *grad);
            }
        }
    }
    return {-(gain - risk), gain, risk};
}

loss_terms dispatch_loss(const eval_context& ctx) {
    ctx.data.validate();
    ctx.cfg.validate();
    if (ctx.batch.empty()) throw empty_batch();
    if (ctx.model.input_size() != ctx.data.L)
        throw size_mismatch("model input size does not match window length");
    const std::size_t need = loss_noise_count(ctx.cfg.objective, ctx.batch.size(),
                                              ctx.data.L, ctx.cfg.n_draws);
    if (ctx.noise.size() < need)
        throw size_mismatch("noise bundle smaller than the loss requires");
    switch (ctx.cfg.objective) {
        case objective_mode::eq13_regularized: return run_eq13(ctx);
        case objective_mode::sampled_aug: return run_sampled(ctx);
        case objective_mode::full_three_term: return run_full(ctx);
    }
    throw invalid_parameter("unknown objective mode");
}

}  // namespace

loss_terms loss_eval(const mlp_model& model, const train_arrays& data,
                     std::span<const std::size_t> batch,
                     const train_config& cfg, std::span<const double> noise) {
    return dispatch_loss({model, data, batch, cfg, noise, nullptr});
}

loss_terms loss_and_gradient(const mlp_model& model, const train_arrays& data,
                             std::span<const std::size_t> batch,
                             const train_config& cfg,
                             std::span<const double> noise,
                             mlp_gradient& grad) {
    return dispatch_loss({model, data, batch, cfg, noise, &grad});
}

train_result train_on_arrays(const train_arrays& data, const train_config& cfg,
                             std::vector<std::size_t> sizes, output_head head,
                             double input_scale, const mlp_model* init) {
    data.validate();
    cfg.validate();

    mlp_model model = init ? *init
                           : make_mlp(std::move(sizes), head, cfg.seed,
                                      input_scale);
    model.validate();

    const noise_source source(cfg.seed);
    const std::size_t batch_size = std::min(cfg.minibatch, data.n);
    const bool full_batch = batch_size == data.n;

    // Adaptive-moment state, flat per layer.
    mlp_gradient m1 = zero_gradient(model), m2 = zero_gradient(model);
    mlp_gradient grad = zero_gradient(model);

    std::vector<std::size_t> all_indices(data.n);
    for (std::size_t i = 0; i < data.n; ++i) all_indices[i] = i;
    std::vector<std::size_t> batch(batch_size);
    std::vector<double> noise;

    train_result out;
    out.loss_trace.reserve(cfg.steps);

    double beta1_pow = 1.0, beta2_pow = 1.0;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        // Minibatch selection: draw without replacement each step.
        if (full_batch) {
            batch = all_indices;
        } else {
            substream pick = source.stream("batch", step);
            for (std::size_t k = 0; k < batch_size; ++k) {
                const std::size_t j =
                    k + static_cast<std::size_t>(pick.next_u64() %
                                                 (data.n - k));
                std::swap(all_indices[k], all_indices[j]);
                batch[k] = all_indices[k];
            }
        }

        const std::size_t need = loss_noise_count(cfg.objective, batch.size(),
                                                  data.L, cfg.n_draws);
        noise.resize(need);
        if (need > 0) {
            substream draws = source.stream("noise", step);
            draws.fill(noise.data(), need);
        }

        for (std::size_t l = 0; l < model.layer_count(); ++l) {
            std::fill(grad.W[l].begin(), grad.W[l].end(), 0.0);
            std::fill(grad.b[l].begin(), grad.b[l].end(), 0.0);
        }
        const loss_terms terms =
            loss_and_gradient(model, data, batch, cfg, noise, grad);
        if (!std::isfinite(terms.loss)) throw non_finite_loss(step);
        out.loss_trace.push_back(terms.loss);

        // Coupled L2 on weights only.
        if (cfg.weight_decay > 0.0)
            for (std::size_t l = 0; l < model.layer_count(); ++l)
                simd::axpy(cfg.weight_decay, model.W[l].data(),
                           grad.W[l].data(), model.W[l].size());

        // Bias-corrected adaptive-moment update.
        beta1_pow *= cfg.beta1;
        beta2_pow *= cfg.beta2;
        const double corr1 = 1.0 - beta1_pow;
        const double corr2 = 1.0 - beta2_pow;
        auto update = [&](std::vector<double>& param,
                          const std::vector<double>& g, std::vector<double>& m,
                          std::vector<double>& v) {
            for (std::size_t k = 0; k < param.size(); ++k) {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                const double m_hat = m[k] / corr1;
                const double v_hat = v[k] / corr2;
                param[k] -= cfg.learning_rate * m_hat /
                            (std::sqrt(v_hat) + cfg.adam_eps);
            }
        };
        for (std::size_t l = 0; l < model.layer_count(); ++l) {
            update(model.W[l], grad.W[l], m1.W[l], m2.W[l]);
            update(model.b[l], grad.b[l], m1.b[l], m2.b[l]);
        }
    }

    out.model = std::move(model);
    return out;
}

train_result train(const window_dataset& ds, const return_series& returns,
                   const vol_estimate& vol, const train_config& cfg,
                   std::vector<std::size_t> sizes, output_head head) {
    const train_arrays data = prepare_training_arrays(ds, returns, vol, cfg);
    // Standardize inputs by the typical return magnitude so the first layer
    // sees O(1) values; the constant is recorded in the model.
    double scale = std::sqrt(
        simd::sum_squares(data.inputs.data(), data.inputs.size()) /
        static_cast<double>(data.inputs.size()));
    if (!(scale > 0.0)) scale = 1.0;
    return train_on_arrays(data, cfg, std::move(sizes), head, scale, nullptr);
}

namespace {

const char* head_name(output_head head) {
    switch (head) {
        case output_head::identity: return "identity";
        case output_head::box_sym: return "box_sym";
        case output_head::box_long: return "box_long";
    }
    throw invalid_parameter("unknown output head");
}

output_head head_from_name(const std::string& name) {
    if (name == "identity") return output_head::identity;
    if (name == "box_sym") return output_head::box_sym;
    if (name == "box_long") return output_head::box_long;
    throw checkpoint_error("unknown output head: " + name);
}

}  // namespace

void save_checkpoint(const mlp_model& model,
                     const std::filesystem::path& path) {
    model.validate();
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["architecture"] = {{"sizes", model.sizes},
                         {"head", head_name(model.head)},
                         {"input_scale", model.input_scale}};
    j["weights"] = model.W;
    j["biases"] = model.b;
    std::ofstream out(path);
    if (!out) throw checkpoint_error("cannot write checkpoint: " + path.string());
    out << j.dump(2) << "\n";
}

mlp_model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw checkpoint_error("cannot read checkpoint: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw checkpoint_error(std::string("malformed checkpoint: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != 1)
            throw checkpoint_error("unsupported checkpoint version");
        mlp_model m;
        const auto& arch = j.at("architecture");
        m.sizes = arch.at("sizes").get<std::vector<std::size_t>>();
        m.head = head_from_name(arch.at("head").get<std::string>());
        m.input_scale = arch.at("input_scale").get<double>();
        m.W = j.at("weights").get<std::vector<std::vector<double>>>();
        m.b = j.at("biases").get<std::vector<std::vector<double>>>();
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw checkpoint_error(std::string("checkpoint fields missing: ") +
                               e.what());
    }
}

}  // namespace finaug
