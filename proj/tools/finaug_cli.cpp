// Command-line front end: reproducible simulation, augmentation, training,
// backtesting, verification, strength search, and the end-to-end scheme
// comparison.  Every artifact embeds the hash of the resolved configuration
// so reruns can be checked byte for byte.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "finaug/augment.hpp"
#include "finaug/backtest.hpp"
#include "finaug/errors.hpp"
#include "finaug/hash.hpp"
#include "finaug/metaopt.hpp"
#include "finaug/nn.hpp"
#include "finaug/pipeline.hpp"
#include "finaug/portfolio.hpp"
#include "finaug/procgen.hpp"
#include "finaug/rng.hpp"
#include "finaug/series.hpp"
#include "finaug/utility.hpp"

namespace {

using namespace finaug;
using ordered_json = nlohmann::ordered_json;

// Thrown by `verify` when a check fails; mapped to exit code 1.
struct verification_failed : std::runtime_error {
    verification_failed() : std::runtime_error("verification failed") {}
};

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(v));
    return buf;
}

std::string trim_copy(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> load_kv_config(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open config file: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim_copy(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw error("config line " + std::to_string(line_no) +
                        ": expected key=value, got '" + t + "'");
        kv[trim_copy(t.substr(0, eq))] = trim_copy(t.substr(eq + 1));
    }
    return kv;
}

bool parse_bool(const std::string& raw, const std::string& key) {
    const std::string v = trim_copy(raw);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw error("config key '" + key + "': cannot parse boolean '" + raw + "'");
}

// Binds a subcommand's options to variables, layers a flat key=value config
// file underneath the command line, and hashes the resolved values.
class option_binder {
  public:
    option_binder(CLI::App* sub, std::string subcommand_name)
        : sub_(sub), name_(std::move(subcommand_name)) {
        sub->add_option("--config", config_path_,
                        "Flat key=value config file; command-line flags "
                        "override its entries");
    }

    void add_double(const std::string& flag, double& var,
                    const std::string& desc, bool required = false) {
        add_entry(flag, required, sub_->add_option(flag, var, desc),
                  [&var, this](const std::string& raw, const std::string& key) {
                      var = parse_num<double>(raw, key);
                  },
                  [&var] { return format_double(var); });
    }

    void add_size(const std::string& flag, std::size_t& var,
                  const std::string& desc) {
        add_entry(flag, false, sub_->add_option(flag, var, desc),
                  [&var, this](const std::string& raw, const std::string& key) {
                      var = parse_num<std::size_t>(raw, key);
                  },
                  [&var] { return std::to_string(var); });
    }

    void add_u64(const std::string& flag, std::uint64_t& var,
                 const std::string& desc) {
        add_entry(flag, false, sub_->add_option(flag, var, desc),
                  [&var, this](const std::string& raw, const std::string& key) {
                      var = parse_num<std::uint64_t>(raw, key);
                  },
                  [&var] { return std::to_string(var); });
    }

    void add_string(const std::string& flag, std::string& var,
                    const std::string& desc, bool required = false) {
        add_entry(flag, required, sub_->add_option(flag, var, desc),
                  [&var](const std::string& raw, const std::string&) { var = raw; },
                  [&var] { return var; });
    }

    void add_flag(const std::string& flag, bool& var,
                  const std::string& desc) {
        add_entry(flag, false, sub_->add_flag(flag, var, desc),
                  [&var](const std::string& raw, const std::string& key) {
                      var = parse_bool(raw, key);
                  },
                  [&var] { return var ? std::string("true") : std::string("false"); });
    }

    // Apply the config file to options not given on the command line, then
    // enforce required options.  Call once, at the start of the action.
    void finalize() {
        std::map<std::string, std::string> kv;
        if (!config_path_.empty()) kv = load_kv_config(config_path_);
        for (entry& e : entries_) {
            if (e.opt->count() > 0) {
                e.provided = true;
                continue;
            }
            const auto it = kv.find(e.key);
            if (it != kv.end()) {
                e.set(it->second, e.key);
                e.provided = true;
            }
        }
        for (const auto& [key, value] : kv)
            if (!std::any_of(entries_.begin(), entries_.end(),
                             [&key](const entry& e) { return e.key == key; }))
                throw error("config key '" + key + "' is not an option of '" +
                            name_ + "'");
        for (const entry& e : entries_)
            if (e.required && !e.provided)
                throw CLI::RequiredError("--" + e.key);
    }

    // Hash of the resolved configuration: sorted key=value lines plus the
    // subcommand name.
    std::uint64_t config_hash() const {
        std::string canon = "subcommand=" + name_ + "\n";
        for (const auto& [key, get] : sorted_values())
            canon += key + "=" + get + "\n";
        return fnv1a64(canon);
    }

    ordered_json config_json() const {
        ordered_json j;
        for (const auto& [key, value] : sorted_values()) j[key] = value;
        return j;
    }

  private:
    struct entry {
        std::string key;
        CLI::Option* opt;
        std::function<void(const std::string&, const std::string&)> set;
        std::function<std::string()> get;
        bool required = false;
        bool provided = false;
    };

    template <class T>
    T parse_num(const std::string& raw, const std::string& key) {
        try {
            if constexpr (std::is_same_v<T, double>)
                return std::stod(raw);
            else
                return static_cast<T>(std::stoull(raw));
        } catch (const std::exception&) {
            throw error("config key '" + key + "': cannot parse '" + raw + "'");
        }
    }

    void add_entry(const std::string& flag, bool required, CLI::Option* opt,
                   std::function<void(const std::string&, const std::string&)> set,
                   std::function<std::string()> get) {
        entry e;
        e.key = flag.substr(flag.find_first_not_of('-'));
        e.opt = opt;
        e.set = std::move(set);
        e.get = std::move(get);
        e.required = required;
        entries_.push_back(std::move(e));
    }

    std::vector<std::pair<std::string, std::string>> sorted_values() const {
        std::vector<std::pair<std::string, std::string>> out;
        out.reserve(entries_.size());
        for (const entry& e : entries_) out.emplace_back(e.key, e.get());
        std::sort(out.begin(), out.end());
        return out;
    }

    CLI::App* sub_;
    std::string name_;
    std::string config_path_;
    std::vector<entry> entries_;
};

void write_json_file(const std::filesystem::path& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw error("cannot open file for writing: " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<std::size_t> parse_hidden_sizes(const std::string& spec) {
    std::vector<std::size_t> sizes;
    std::string token;
    std::stringstream ss(spec);
    while (std::getline(ss, token, ',')) {
        const std::string t = trim_copy(token);
        if (t.empty()) continue;
        try {
            sizes.push_back(static_cast<std::size_t>(std::stoull(t)));
        } catch (const std::exception&) {
            throw error("cannot parse hidden layer size '" + t + "'");
        }
    }
    return sizes;
}

output_head head_from_string(const std::string& name) {
    if (name == "identity") return output_head::identity;
    if (name == "box_sym") return output_head::box_sym;
    if (name == "box_long") return output_head::box_long;
    throw error("unknown output head '" + name +
                "' (expected identity, box_sym, or box_long)");
}

scheme_kind scheme_from_string(const std::string& name) {
    if (name == "additive") return scheme_kind::additive;
    if (name == "naive") return scheme_kind::naive_multiplicative;
    if (name == "proposed") return scheme_kind::proposed_multiplicative;
    if (name == "none") return scheme_kind::none;
    throw error("unknown scheme '" + name +
                "' (expected none, additive, naive, or proposed)");
}

objective_mode objective_from_string(const std::string& name) {
    if (name == "eq13") return objective_mode::eq13_regularized;
    if (name == "sampled") return objective_mode::sampled_aug;
    if (name == "full") return objective_mode::full_three_term;
    throw error("unknown objective '" + name +
                "' (expected eq13, sampled, or full)");
}

// ---------------------------------------------------------------------------
// simulate

struct simulate_gbm_state {
    option_binder* bind = nullptr;
    double s0 = 1.0, r = NAN, sigma = NAN;
    std::size_t steps = 400;
    std::uint64_t seed = 1, trajectory = 0;
    std::string out = "gbm.csv", column = "close";

    void run() const {
        bind->finalize();
        gbm_params params;
        params.s0 = s0;
        params.r = r;
        params.sigma = sigma;
        params.validate();
        const noise_source noise(seed);
        const price_series series = simulate_gbm(params, steps, noise, trajectory);
        const std::vector<std::string> comments = {
            "config_hash=" + hex64(bind->config_hash())};
        write_price_csv(out, series, column, comments);
        std::cout << "wrote " << out << " (" << series.size() << " prices)\n";
    }
};

struct simulate_heston_state {
    option_binder* bind = nullptr;
    double s0 = 1.0, r = NAN, nu0 = 1e-4, kappa = 0.25, theta = 4e-4, xi = 0.1,
           rho = 0.0, dt = 1.0;
    std::size_t steps = 400;
    std::uint64_t seed = 1, trajectory = 0;
    std::string out = "heston.csv", column = "close", variance_out;

    void run() const {
        bind->finalize();
        heston_params params;
        params.s0 = s0;
        params.r = r;
        params.nu0 = nu0;
        params.kappa = kappa;
        params.theta = theta;
        params.xi = xi;
        params.rho = rho;
        params.dt = dt;
        params.validate();
        const noise_source noise(seed);
        const heston_path path = simulate_heston(params, steps, noise, trajectory);
        const std::vector<std::string> comments = {
            "config_hash=" + hex64(bind->config_hash())};
        write_price_csv(out, path.prices, column, comments);
        if (!variance_out.empty()) {
            std::ofstream vout(variance_out);
            if (!vout)
                throw error("cannot open file for writing: " + variance_out);
            vout << "# config_hash=" << hex64(bind->config_hash()) << "\n";
            vout << "t,variance\n";
            vout.precision(17);
            for (std::size_t t = 0; t < path.variance.size(); ++t)
                vout << t << "," << path.variance[t] << "\n";
        }
        std::cout << "wrote " << out << " (" << path.prices.size()
                  << " prices)\n";
    }
};

// ---------------------------------------------------------------------------
// augment

struct augment_state {
    option_binder* bind = nullptr;
    std::string in, out, scheme;
    double strength = NAN;
    std::uint64_t seed = 1;
    std::size_t vol_window = 20;
    std::string column = "close";

    void run() const {
        bind->finalize();
        const price_series series = load_price_csv(in, column);
        const scheme_kind kind = scheme_from_string(scheme);
        const augmentation_scheme sch{kind, strength};
        sch.validate();

        vol_estimate vol;
        const vol_estimate* vol_ptr = nullptr;
        const return_series returns = compute_returns(series);
        if (kind == scheme_kind::proposed_multiplicative) {
            vol = estimate_volatility(returns, vol_window);
            vol_ptr = &vol;
        }

        const noise_source source(seed);
        substream stream = source.stream("augment", 0);
        const price_series augmented = augment_prices(series, sch, vol_ptr, stream);

        const std::string hash = hex64(bind->config_hash());
        const std::vector<std::string> comments = {"config_hash=" + hash};
        write_price_csv(out, augmented, column, comments);

        // Audit: the per-price noise variance the scheme injected.
        std::vector<double> variance(series.size(), 0.0);
        std::size_t non_positive = 0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            double sd = 0.0;
            switch (kind) {
                case scheme_kind::none: break;
                case scheme_kind::additive: sd = strength; break;
                case scheme_kind::naive_multiplicative:
                    sd = strength * series.prices[i];
                    break;
                case scheme_kind::proposed_multiplicative: {
                    const std::size_t ri =
                        i < returns.size() ? i : returns.size() - 1;
                    const double sig = vol.sigma_hat[ri];
                    sd = strength * std::sqrt(sig * sig *
                                              std::abs(returns.returns[ri])) *
                         series.prices[i];
                    break;
                }
            }
            variance[i] = sd * sd;
            if (augmented.prices[i] <= 0.0) ++non_positive;
        }
        double mean_var = 0.0, max_var = 0.0;
        for (const double v : variance) {
            mean_var += v;
            max_var = std::max(max_var, v);
        }
        mean_var /= static_cast<double>(variance.size());

        ordered_json sidecar;
        sidecar["subcommand"] = "augment";
        sidecar["scheme"] = scheme;
        sidecar["strength"] = strength;
        sidecar["seed"] = seed;
        sidecar["config"] = bind->config_json();
        sidecar["config_hash"] = hash;
        sidecar["perturbation_variance"] = {
            {"mean", mean_var},
            {"max", max_var},
            {"per_price", variance},
        };
        sidecar["non_positive_outputs"] = non_positive;
        sidecar["output_csv"] = out;
        const std::filesystem::path sidecar_path =
            std::filesystem::path(out).string() + ".json";
        write_json_file(sidecar_path, sidecar);
        std::cout << "wrote " << out << " and " << sidecar_path.string() << "\n";
    }
};

// ---------------------------------------------------------------------------
// train

struct train_state {
    option_binder* bind = nullptr;
    std::string data, column = "close", hidden = "16", head = "box_sym",
                objective = "eq13", out = "model.json";
    std::size_t window = 10, steps = 2000, minibatch = 64, n_draws = 8,
                tau = 20, vol_window = 20;
    double lambda = 1.0, c = 2.0, learning_rate = 1e-3, weight_decay = 0.0;
    std::uint64_t seed = 1;

    void run() const {
        bind->finalize();
        const price_series series = load_price_csv(data, column);
        const return_series returns = compute_returns(series);
        const window_dataset ds = make_windows(returns, window);
        const vol_estimate vol = estimate_volatility(returns, vol_window);

        train_config cfg;
        cfg.lambda = lambda;
        cfg.c = c;
        cfg.objective = objective_from_string(objective);
        cfg.minibatch = minibatch;
        cfg.steps = steps;
        cfg.learning_rate = learning_rate;
        cfg.seed = seed;
        cfg.weight_decay = weight_decay;
        cfg.tau = tau;
        cfg.n_draws = n_draws;
        cfg.validate();

        std::vector<std::size_t> sizes;
        sizes.push_back(window);
        for (std::size_t h : parse_hidden_sizes(hidden)) sizes.push_back(h);
        sizes.push_back(1);

        const train_result result =
            train(ds, returns, vol, cfg, sizes, head_from_string(head));
        save_checkpoint(result.model, out);

        ordered_json record;
        record["subcommand"] = "train";
        record["config"] = bind->config_json();
        record["config_hash"] = hex64(bind->config_hash());
        record["seed"] = seed;
        record["windows"] = ds.count;
        record["final_loss"] = result.loss_trace.back();
        record["checkpoint"] = out;
        std::filesystem::path record_path(out);
        record_path.replace_extension(".run.json");
        write_json_file(record_path, record);
        std::cout << "trained " << ds.count << " windows for " << steps
                  << " steps; final loss " << format_double(result.loss_trace.back())
                  << "\nwrote " << out << " and " << record_path.string() << "\n";
    }
};

// ---------------------------------------------------------------------------
// backtest

struct backtest_state {
    option_binder* bind = nullptr;
    std::string data, column = "close", strategy, checkpoint, out = "backtest";
    std::size_t window = 0;  // 0: use the model's input size or 10
    double lambda = 1.0, r = NAN, sigma = NAN;
    std::uint64_t seed = 1;

    void run() const {
        bind->finalize();
        const price_series series = load_price_csv(data, column);

        mlp_model model;
        backtest_rule rule;
        std::size_t L = window;
        if (strategy == "model") {
            if (checkpoint.empty())
                throw error("--strategy model requires --checkpoint");
            model = load_checkpoint(checkpoint);
            if (L == 0) L = model.input_size();
            if (L != model.input_size())
                throw invalid_parameter(
                    "--window disagrees with the checkpoint input size");
            rule = [&model](std::span<const double> w) {
                return forward(model, w);
            };
        } else if (strategy == "sign") {
            rule = [](std::span<const double> w) {
                return w.back() >= 0.0 ? 1.0 : -1.0;
            };
        } else if (strategy == "hold") {
            rule = [](std::span<const double>) { return 1.0; };
        } else if (strategy == "zero") {
            rule = [](std::span<const double>) { return 0.0; };
        } else if (strategy == "stationary") {
            if (std::isnan(r) || std::isnan(sigma))
                throw error("--strategy stationary requires --r and --sigma");
            gbm_params params;
            params.r = r;
            params.sigma = sigma;
            const double pi = merton_stationary(params, lambda);
            rule = [pi](std::span<const double>) { return pi; };
        } else {
            throw error("unknown strategy '" + strategy +
                        "' (expected model, sign, hold, zero, or stationary)");
        }
        if (L == 0) L = 10;

        const wealth_trajectory trajectory = run_backtest(rule, series, L);
        double sharpe_value = 0.0;
        bool degenerate = false;
        try {
            sharpe_value = sharpe(trajectory);
        } catch (const zero_dispersion&) {
            degenerate = true;
        }

        const std::string hash = hex64(bind->config_hash());
        // --out is a prefix; tolerate a ".json" spelled out by the caller.
        std::string stem = out;
        if (stem.ends_with(".json")) stem.resize(stem.size() - 5);
        const std::string wealth_csv = stem + "_wealth.csv";
        const std::string positions_csv = stem + "_positions.csv";
        {
            std::ofstream w(wealth_csv);
            if (!w) throw error("cannot open file for writing: " + wealth_csv);
            w << "# config_hash=" << hash << "\n" << "t,wealth\n";
            w.precision(17);
            for (std::size_t t = 0; t < trajectory.wealth.size(); ++t)
                w << t << "," << trajectory.wealth[t] << "\n";
        }
        {
            std::ofstream p(positions_csv);
            if (!p) throw error("cannot open file for writing: " + positions_csv);
            p << "# config_hash=" << hash << "\n" << "t,position\n";
            p.precision(17);
            for (std::size_t t = 0; t < trajectory.positions.size(); ++t)
                p << t << "," << trajectory.positions[t] << "\n";
        }

        ordered_json report;
        report["strategy"] = strategy;
        report["T"] = trajectory.positions.size();
        report["sharpe"] = sharpe_value;
        report["degenerate"] = degenerate;
        report["final_wealth"] = trajectory.wealth.back();
        report["bankruptcies"] = trajectory.bankrupt ? 1 : 0;
        report["positions_csv_path"] = positions_csv;
        report["wealth_csv_path"] = wealth_csv;
        report["config"] = bind->config_json();
        report["config_hash"] = hash;
        report["seed"] = seed;
        write_json_file(stem + ".json", report);
        std::cout << "strategy " << strategy << ": "
                  << trajectory.positions.size() << " steps, sharpe "
                  << format_double(sharpe_value) << ", final wealth "
                  << format_double(trajectory.wealth.back())
                  << (trajectory.bankrupt ? " (bankrupt)" : "") << "\n"
                  << "wrote " << stem << ".json\n";
    }
};

// ---------------------------------------------------------------------------
// verify

struct verify_state {
    option_binder* bind = nullptr;
    double lambda = 1.0, r = 0.005, sigma = 0.01;
    std::size_t sets = 2000, t_steps = 400;
    std::uint64_t seed = 1;

    struct row {
        std::string name;
        double closed = 0.0, mc = 0.0, se = 0.0;
        bool pass = false;
    };

    void run() const {
        bind->finalize();
        if (sigma <= 0.0) throw zero_volatility();
        if (r <= 0.0) throw zero_drift();
        gbm_params model;
        model.r = r;
        model.sigma = sigma;
        model.validate();
        const double lam = lambda;

        std::vector<row> rows;

        // Sign strategy, no augmentation: exact closed form vs MC.
        {
            row rw;
            rw.name = "sign (no augmentation)";
            rw.closed = true_utility_no_aug(model, lam).value;
            const strategy_builder builder =
                [](const price_series&, const return_series& ret) {
                    return sign_strategy(ret);
                };
            const utility_report mc = true_utility_mc(
                builder, model, lam, t_steps, sets, 0, noise_source(seed));
            rw.mc = mc.value;
            rw.se = mc.se;
            rw.pass = std::abs(rw.mc - rw.closed) <= 3.0 * rw.se;
            rows.push_back(rw);
        }

        // Fitted strategy under the per-step (proposed) strengths.
        {
            row rw;
            rw.name = "fitted, per-step strengths";
            rw.closed = true_utility_proposed(model, lam).value;
            const strategy_builder builder =
                [&model, lam](const price_series& prices,
                              const return_series& ret) {
                    const auto gamma_sq =
                        optimal_proposed_strength_sq(prices, model);
                    return augmented_closed_form(ret, prices, lam, gamma_sq);
                };
            const utility_report mc = true_utility_mc(
                builder, model, lam, t_steps, sets, 0, noise_source(seed));
            rw.mc = mc.value;
            rw.se = mc.se;
            rw.pass = std::abs(rw.mc - rw.closed) <= 3.0 * rw.se;
            rows.push_back(rw);
        }

        // Fitted strategy under the constant (additive) strength: the
        // closed-form column is the equivalent per-series expression,
        // evaluated over the same training sets.
        utility_report additive_mc;
        {
            row rw;
            rw.name = "fitted, constant strength";
            const utility_report bracket_route = true_utility_additive(
                model, lam, t_steps, sets, noise_source(seed));
            rw.closed = bracket_route.value;
            const strategy_builder builder =
                [&model, lam](const price_series& prices,
                              const return_series& ret) {
                    const strength_value rho =
                        optimal_additive_strength(prices, model);
                    std::vector<strength_value> gamma_sq(
                        ret.size(),
                        rho.unbounded ? strength_value::infinite()
                                      : strength_value::finite(rho.value *
                                                               rho.value));
                    return augmented_closed_form(ret, prices, lam, gamma_sq);
                };
            additive_mc = true_utility_mc(builder, model, lam, t_steps, sets,
                                          0, noise_source(seed));
            rw.mc = additive_mc.value;
            rw.se = std::sqrt(additive_mc.se * additive_mc.se +
                              bracket_route.se * bracket_route.se);
            rw.pass = std::abs(rw.mc - rw.closed) <= 3.0 * rw.se;
            rows.push_back(rw);
        }

        std::printf("%-28s %16s %16s %12s %6s\n", "strategy", "closed-form",
                    "monte-carlo", "se", "pass");
        bool all_pass = true;
        for (const row& rw : rows) {
            std::printf("%-28s %16.9e %16.9e %12.3e %6s\n", rw.name.c_str(),
                        rw.closed, rw.mc, rw.se, rw.pass ? "yes" : "NO");
            all_pass = all_pass && rw.pass;
        }

        // Ordering: the per-step scheme must beat both alternatives by more
        // than three combined standard errors (common random numbers: every
        // row above used the same simulated training sets).
        const double u_prop = rows[1].mc, se_prop = rows[1].se;
        const auto beats = [&](double other, double other_se,
                               const char* label) {
            const double gap = u_prop - other;
            const double se =
                std::sqrt(se_prop * se_prop + other_se * other_se);
            const bool ok = gap > 3.0 * se;
            std::printf("ordering: per-step > %s by %.3e (3*se %.3e)  %s\n",
                        label, gap, 3.0 * se, ok ? "yes" : "NO");
            return ok;
        };
        all_pass = beats(rows[2].mc, additive_mc.se, "constant") && all_pass;
        all_pass = beats(rows[0].mc, rows[0].se, "none") && all_pass;

        std::printf("config_hash=%s\n", hex64(bind->config_hash()).c_str());
        std::printf("%s\n", all_pass ? "PASS" : "FAIL");
        if (!all_pass) throw verification_failed();
    }
};

// ---------------------------------------------------------------------------
// metaopt

struct metaopt_state {
    option_binder* bind = nullptr;
    std::string scheme, out = "curve.csv";
    double theta_min = 1e-3, theta_max = 10.0, lambda = 1.0, r = 0.005,
           sigma = 0.01, s0 = 1.0;
    std::size_t points = 25, t_steps = 400, sets = 200;
    bool log_grid = false;
    std::uint64_t seed = 1;

    void run() const {
        bind->finalize();
        if (!(theta_min > 0.0) || !(theta_max > theta_min))
            throw invalid_parameter("need 0 < theta-min < theta-max");
        if (points < 2) throw invalid_parameter("need at least two grid points");

        theta_grid grid;
        grid.kind = scheme_from_string(scheme);
        grid.values.resize(points);
        for (std::size_t i = 0; i < points; ++i) {
            const double f =
                static_cast<double>(i) / static_cast<double>(points - 1);
            grid.values[i] =
                log_grid ? theta_min * std::pow(theta_max / theta_min, f)
                         : theta_min + f * (theta_max - theta_min);
        }
        grid.validate();

        gbm_params model;
        model.s0 = s0;
        model.r = r;
        model.sigma = sigma;
        model.validate();

        const theta_curve curve =
            best_theta(grid, model, lambda, t_steps, sets, seed);

        std::ofstream csv(out);
        if (!csv) throw error("cannot open file for writing: " + out);
        csv << "# config_hash=" << hex64(bind->config_hash()) << "\n";
        csv << "# best_theta=" << format_double(curve.best_theta()) << "\n";
        csv << "theta,value,se\n";
        csv.precision(17);
        for (std::size_t i = 0; i < curve.theta.size(); ++i)
            csv << curve.theta[i] << "," << curve.value[i] << ","
                << curve.se[i] << "\n";
        std::cout << "best theta " << format_double(curve.best_theta())
                  << " (value " << format_double(curve.value[curve.best_index])
                  << ")\nwrote " << out << "\n";
    }
};

// ---------------------------------------------------------------------------
// pipeline

struct pipeline_state {
    option_binder* bind = nullptr;
    std::string data, hidden = "16", out = "pipeline.json";
    double s0 = 1.0, r = 0.005, sigma = 0.01, lambda = 1.0, c = 40.0,
           weight_decay = 1e-5, learning_rate = 1e-2;
    std::size_t train_len = 400, test_len = 400, window = 10, sgd_steps = 2000,
                minibatch = 64, n_draws = 8, tau = 20, vol_window = 20,
                n_seeds = 5;
    bool no_short = false;
    std::uint64_t seed = 1;

    void run() const {
        bind->finalize();
        pipeline_config cfg;
        cfg.model.s0 = s0;
        cfg.model.r = r;
        cfg.model.sigma = sigma;
        cfg.train_len = train_len;
        cfg.test_len = test_len;
        cfg.window_len = window;
        cfg.hidden = parse_hidden_sizes(hidden);
        cfg.lambda = lambda;
        cfg.c = c;
        cfg.weight_decay = weight_decay;
        cfg.sgd_steps = sgd_steps;
        cfg.minibatch = minibatch;
        cfg.learning_rate = learning_rate;
        cfg.n_draws = n_draws;
        cfg.tau = tau;
        cfg.vol_window = vol_window;
        cfg.constraint =
            no_short ? box_constraint::long_only : box_constraint::box_short;
        cfg.seed = seed;
        cfg.n_seeds = n_seeds;

        pipeline_report report;
        if (data.empty()) {
            report = run_pipeline(cfg);
        } else {
            const price_series series = load_price_csv(data);
            report = run_pipeline(cfg, series);
        }

        const auto order = pipeline_scheme_order();
        ordered_json j;
        j["subcommand"] = "pipeline";
        j["config"] = bind->config_json();
        j["config_hash"] = hex64(bind->config_hash());
        j["seed"] = seed;
        ordered_json means;
        for (std::size_t s = 0; s < order.size(); ++s)
            means[std::string(pipeline_scheme_name(order[s]))] =
                report.mean_sharpe[s];
        j["mean_sharpe"] = means;

        std::vector<std::size_t> rank(order.size());
        for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
        std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
            return report.mean_sharpe[a] > report.mean_sharpe[b];
        });
        ordered_json ranking = ordered_json::array();
        for (const std::size_t s : rank)
            ranking.push_back(std::string(pipeline_scheme_name(order[s])));
        j["ranking"] = ranking;

        std::size_t bankruptcies = 0;
        ordered_json seeds = ordered_json::array();
        for (const pipeline_seed_run& sr : report.seeds) {
            ordered_json js;
            js["run_seed"] = sr.run_seed;
            ordered_json runs = ordered_json::array();
            for (const scheme_run& run : sr.runs) {
                ordered_json jr;
                jr["scheme"] = std::string(pipeline_scheme_name(run.scheme));
                jr["strength"] = run.strength;
                jr["strength_unavailable"] = run.strength_unavailable;
                jr["sharpe"] = run.sharpe_ratio;
                jr["degenerate"] = run.degenerate;
                jr["final_wealth"] = run.final_wealth;
                jr["bankrupt"] = run.bankrupt;
                jr["positions"] = run.trajectory.positions;
                runs.push_back(std::move(jr));
                if (run.bankrupt) ++bankruptcies;
            }
            js["runs"] = std::move(runs);
            seeds.push_back(std::move(js));
        }
        j["bankruptcies"] = bankruptcies;
        j["seeds"] = std::move(seeds);
        write_json_file(out, j);

        std::cout << "mean held-out sharpe over " << report.seeds.size()
                  << " seed(s):\n";
        for (std::size_t s = 0; s < order.size(); ++s)
            std::printf("  %-12s %+.4f\n",
                        std::string(pipeline_scheme_name(order[s])).c_str(),
                        report.mean_sharpe[s]);
        std::cout << "wrote " << out << "\n";
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "finaug: noise-injection training schemes for trading models"};
    app.require_subcommand(1);

    // simulate ---------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "Write simulated price CSVs");
    sim->require_subcommand(1);

    auto gbm_state = std::make_shared<simulate_gbm_state>();
    {
        auto* gbm = sim->add_subcommand("gbm", "Constant-volatility walk");
        auto binder = std::make_shared<option_binder>(gbm, "simulate gbm");
        gbm_state->bind = binder.get();
        binder->add_double("--s0", gbm_state->s0, "Initial price");
        binder->add_double("--r", gbm_state->r, "Per-step drift", true);
        binder->add_double("--sigma", gbm_state->sigma, "Per-step volatility",
                           true);
        binder->add_size("--steps", gbm_state->steps, "Number of price steps");
        binder->add_u64("--seed", gbm_state->seed, "Root seed");
        binder->add_u64("--trajectory", gbm_state->trajectory,
                        "Trajectory index within the seed");
        binder->add_string("--out", gbm_state->out, "Output CSV path");
        binder->add_string("--column", gbm_state->column, "Price column name");
        gbm->callback([gbm_state, binder] { gbm_state->run(); });
    }

    auto heston_state = std::make_shared<simulate_heston_state>();
    {
        auto* heston =
            sim->add_subcommand("heston", "Stochastic-volatility walk");
        auto binder = std::make_shared<option_binder>(heston, "simulate heston");
        heston_state->bind = binder.get();
        binder->add_double("--s0", heston_state->s0, "Initial price");
        binder->add_double("--r", heston_state->r, "Per-step drift", true);
        binder->add_double("--nu0", heston_state->nu0, "Initial variance");
        binder->add_double("--kappa", heston_state->kappa,
                           "Variance mean-reversion rate");
        binder->add_double("--theta", heston_state->theta,
                           "Long-run variance level");
        binder->add_double("--xi", heston_state->xi, "Volatility of variance");
        binder->add_double("--rho", heston_state->rho,
                           "Price/variance shock correlation");
        binder->add_double("--dt", heston_state->dt, "Time step");
        binder->add_size("--steps", heston_state->steps,
                         "Number of price steps");
        binder->add_u64("--seed", heston_state->seed, "Root seed");
        binder->add_u64("--trajectory", heston_state->trajectory,
                        "Trajectory index within the seed");
        binder->add_string("--out", heston_state->out, "Output CSV path");
        binder->add_string("--column", heston_state->column,
                           "Price column name");
        binder->add_string("--variance-out", heston_state->variance_out,
                           "Optional CSV of the variance path");
        heston->callback([heston_state, binder] { heston_state->run(); });
    }

    // augment ----------------------------------------------------------------
    auto aug_state = std::make_shared<augment_state>();
    {
        auto* aug = app.add_subcommand(
            "augment", "Noise a price CSV and write an audit sidecar");
        auto binder = std::make_shared<option_binder>(aug, "augment");
        aug_state->bind = binder.get();
        binder->add_string("--in", aug_state->in, "Input price CSV", true);
        binder->add_string("--out", aug_state->out, "Output price CSV", true);
        binder->add_string("--scheme", aug_state->scheme,
                           "none, additive, naive, or proposed", true);
        binder->add_double("--strength", aug_state->strength,
                           "rho / rho0 / c for the chosen scheme", true);
        binder->add_u64("--seed", aug_state->seed, "Root seed");
        binder->add_size("--vol-window", aug_state->vol_window,
                         "Trailing window for the volatility estimate");
        binder->add_string("--column", aug_state->column, "Price column name");
        aug->callback([aug_state, binder] { aug_state->run(); });
    }

    // train ------------------------------------------------------------------
    auto train_st = std::make_shared<train_state>();
    {
        auto* tr = app.add_subcommand(
            "train", "Fit a position model on a price CSV");
        auto binder = std::make_shared<option_binder>(tr, "train");
        train_st->bind = binder.get();
        binder->add_string("--data", train_st->data, "Training price CSV", true);
        binder->add_string("--column", train_st->column, "Price column name");
        binder->add_size("--window", train_st->window,
                         "Trailing returns fed to the model");
        binder->add_string("--hidden", train_st->hidden,
                           "Comma-separated hidden layer sizes");
        binder->add_string("--head", train_st->head,
                           "identity, box_sym, or box_long");
        binder->add_string("--objective", train_st->objective,
                           "eq13, sampled, or full");
        binder->add_double("--lambda", train_st->lambda, "Risk aversion");
        binder->add_double("--c", train_st->c, "Noise strength multiplier");
        binder->add_size("--tau", train_st->tau,
                         "Smoothing window for the penalty scale");
        binder->add_size("--vol-window", train_st->vol_window,
                         "Trailing window for the volatility estimate");
        binder->add_size("--steps", train_st->steps, "Optimizer steps");
        binder->add_size("--minibatch", train_st->minibatch, "Minibatch size");
        binder->add_double("--lr", train_st->learning_rate, "Learning rate");
        binder->add_size("--n-draws", train_st->n_draws,
                         "Noise draws per step (sampling objectives)");
        binder->add_double("--weight-decay", train_st->weight_decay,
                           "Coupled L2 strength on weights");
        binder->add_u64("--seed", train_st->seed, "Root seed");
        binder->add_string("--out", train_st->out, "Checkpoint path");
        tr->callback([train_st, binder] { train_st->run(); });
    }

    // backtest ---------------------------------------------------------------
    auto bt_state = std::make_shared<backtest_state>();
    {
        auto* bt = app.add_subcommand(
            "backtest", "Roll a strategy over a price CSV");
        auto binder = std::make_shared<option_binder>(bt, "backtest");
        bt_state->bind = binder.get();
        binder->add_string("--data", bt_state->data, "Test price CSV", true);
        binder->add_string("--column", bt_state->column, "Price column name");
        binder->add_string("--strategy", bt_state->strategy,
                           "model, sign, hold, zero, or stationary", true);
        binder->add_string("--checkpoint", bt_state->checkpoint,
                           "Model checkpoint (strategy=model)");
        binder->add_size("--window", bt_state->window,
                         "Trailing returns fed to the rule");
        binder->add_double("--lambda", bt_state->lambda,
                           "Risk aversion (strategy=stationary)");
        binder->add_double("--r", bt_state->r,
                           "Drift (strategy=stationary)");
        binder->add_double("--sigma", bt_state->sigma,
                           "Volatility (strategy=stationary)");
        binder->add_u64("--seed", bt_state->seed, "Root seed (recorded)");
        binder->add_string("--out", bt_state->out,
                           "Output prefix for the JSON report and CSVs");
        bt->callback([bt_state, binder] { bt_state->run(); });
    }

    // verify -----------------------------------------------------------------
    auto verify_st = std::make_shared<verify_state>();
    {
        auto* ver = app.add_subcommand(
            "verify", "Check the closed forms against Monte Carlo");
        auto binder = std::make_shared<option_binder>(ver, "verify");
        verify_st->bind = binder.get();
        binder->add_double("--lambda", verify_st->lambda, "Risk aversion");
        binder->add_double("--r", verify_st->r, "Per-step drift");
        binder->add_double("--sigma", verify_st->sigma, "Per-step volatility");
        binder->add_size("--sets", verify_st->sets,
                         "Simulated training sets per check");
        binder->add_size("--t", verify_st->t_steps,
                         "Steps per training set");
        binder->add_u64("--seed", verify_st->seed, "Root seed");
        ver->callback([verify_st, binder] { verify_st->run(); });
    }

    // metaopt ----------------------------------------------------------------
    auto meta_state = std::make_shared<metaopt_state>();
    {
        auto* meta = app.add_subcommand(
            "metaopt", "Grid-search the noise strength");
        auto binder = std::make_shared<option_binder>(meta, "metaopt");
        meta_state->bind = binder.get();
        binder->add_string("--scheme", meta_state->scheme,
                           "additive, naive, or proposed", true);
        binder->add_double("--theta-min", meta_state->theta_min,
                           "Smallest candidate strength (> 0)");
        binder->add_double("--theta-max", meta_state->theta_max,
                           "Largest candidate strength");
        binder->add_size("--points", meta_state->points, "Grid size");
        binder->add_flag("--log", meta_state->log_grid,
                         "Log-spaced grid instead of linear");
        binder->add_double("--lambda", meta_state->lambda, "Risk aversion");
        binder->add_double("--r", meta_state->r, "Per-step drift");
        binder->add_double("--sigma", meta_state->sigma, "Per-step volatility");
        binder->add_double("--s0", meta_state->s0, "Initial price");
        binder->add_size("--t", meta_state->t_steps, "Steps per training set");
        binder->add_size("--sets", meta_state->sets,
                         "Simulated training sets per grid point");
        binder->add_u64("--seed", meta_state->seed, "Root seed");
        binder->add_string("--out", meta_state->out, "Curve CSV path");
        meta->callback([meta_state, binder] { meta_state->run(); });
    }

    // pipeline ----------------------------------------------------------------
    auto pipe_state = std::make_shared<pipeline_state>();
    {
        auto* pipe = app.add_subcommand(
            "pipeline", "Train and backtest every scheme side by side");
        auto binder = std::make_shared<option_binder>(pipe, "pipeline");
        pipe_state->bind = binder.get();
        binder->add_string("--data", pipe_state->data,
                           "Optional fixed price CSV (default: simulate)");
        binder->add_double("--s0", pipe_state->s0, "Initial price");
        binder->add_double("--r", pipe_state->r, "Per-step drift");
        binder->add_double("--sigma", pipe_state->sigma, "Per-step volatility");
        binder->add_size("--train-len", pipe_state->train_len,
                         "Training returns");
        binder->add_size("--test-len", pipe_state->test_len,
                         "Held-out traded steps");
        binder->add_size("--window", pipe_state->window,
                         "Trailing returns fed to the model");
        binder->add_string("--hidden", pipe_state->hidden,
                           "Comma-separated hidden layer sizes");
        binder->add_double("--lambda", pipe_state->lambda, "Risk aversion");
        binder->add_double("--c", pipe_state->c,
                           "Proposed-scheme strength factor");
        binder->add_double("--weight-decay", pipe_state->weight_decay,
                           "L2 strength for the weight-decay baseline");
        binder->add_size("--steps", pipe_state->sgd_steps, "Optimizer steps");
        binder->add_size("--minibatch", pipe_state->minibatch,
                         "Minibatch size");
        binder->add_double("--lr", pipe_state->learning_rate, "Learning rate");
        binder->add_size("--n-draws", pipe_state->n_draws,
                         "Noise draws (sampling objectives)");
        binder->add_size("--tau", pipe_state->tau,
                         "Smoothing window for the penalty scale");
        binder->add_size("--vol-window", pipe_state->vol_window,
                         "Trailing window for the volatility estimate");
        binder->add_flag("--no-short", pipe_state->no_short,
                         "Constrain positions to [0, 1]");
        binder->add_u64("--seed", pipe_state->seed, "Root seed");
        binder->add_size("--seeds", pipe_state->n_seeds,
                         "Independent runs to average");
        binder->add_string("--out", pipe_state->out, "Report JSON path");
        pipe->callback([pipe_state, binder] { pipe_state->run(); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const verification_failed&) {
        return 1;
    } catch (const finaug::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
