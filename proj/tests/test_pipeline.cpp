#include <doctest.h>

#include <cstdint>
#include <string_view>
#include <vector>

#include "finaug/errors.hpp"
#include "finaug/pipeline.hpp"
#include "finaug/procgen.hpp"
#include "finaug/rng.hpp"
#include "oracles.hpp"

using namespace finaug;

namespace {

// Small-but-valid configuration that keeps each run to a fraction of a
// second; shapes and determinism do not need long training.
pipeline_config tiny_config() {
    pipeline_config cfg;
    cfg.model.r = 0.005;
    cfg.model.sigma = 0.01;
    cfg.model.s0 = 1.0;
    cfg.train_len = 60;
    cfg.test_len = 25;
    cfg.window_len = 5;
    cfg.hidden = {4};
    cfg.sgd_steps = 40;
    cfg.minibatch = 16;
    cfg.learning_rate = 1e-2;
    cfg.n_draws = 2;
    cfg.tau = 5;
    cfg.vol_window = 10;
    cfg.n_seeds = 1;
    cfg.seed = 3;
    return cfg;
}

price_series series_for(const pipeline_config& cfg, std::uint64_t key) {
    const noise_source noise(key);
    return simulate_gbm(cfg.model, cfg.train_len + cfg.test_len, noise, 0);
}

}  // namespace

TEST_CASE("configuration validation walks every constraint") {
    pipeline_config cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());

    pipeline_config bad = cfg;
    bad.window_len = 0;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.train_len = cfg.window_len;
    CHECK_THROWS_AS(bad.validate(), series_too_short);

    bad = cfg;
    bad.test_len = 1;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.hidden = {4, 0};
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.lambda = -1.0;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.c = -0.5;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.weight_decay = -1e-3;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.sgd_steps = 0;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.n_draws = 1;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.vol_window = cfg.train_len + 1;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    bad = cfg;
    bad.n_seeds = 0;
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);
}

TEST_CASE("the comparison order and names are fixed") {
    const auto order = pipeline_scheme_order();
    REQUIRE(order.size() == 5);
    CHECK(pipeline_scheme_name(order[0]) == std::string_view("none"));
    CHECK(pipeline_scheme_name(order[1]) == std::string_view("weight-decay"));
    CHECK(pipeline_scheme_name(order[2]) == std::string_view("additive"));
    CHECK(pipeline_scheme_name(order[3]) == std::string_view("naive"));
    CHECK(pipeline_scheme_name(order[4]) == std::string_view("proposed"));
}

TEST_CASE("one round on an explicit series is complete and reproducible") {
    const pipeline_config cfg = tiny_config();
    const price_series series = series_for(cfg, 11);

    const pipeline_seed_run a = run_pipeline_once(series, cfg, 42);
    const pipeline_seed_run b = run_pipeline_once(series, cfg, 42);
    REQUIRE(a.runs.size() == pipeline_scheme_order().size());
    CHECK(a.run_seed == 42);
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].scheme == pipeline_scheme_order()[i]);
        CHECK(a.runs[i].sharpe_ratio == b.runs[i].sharpe_ratio);
        CHECK(a.runs[i].final_wealth == b.runs[i].final_wealth);
        CHECK(a.runs[i].strength == b.runs[i].strength);
        CHECK(a.runs[i].trajectory.wealth == b.runs[i].trajectory.wealth);
        // Exactly test_len traded steps.
        CHECK(a.runs[i].trajectory.positions.size() == cfg.test_len);
        CHECK(a.runs[i].trajectory.wealth.size() == cfg.test_len + 1);
        CHECK(a.runs[i].trajectory.wealth.front() == 1.0);
    }

    const pipeline_seed_run c = run_pipeline_once(series, cfg, 43);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.runs.size(); ++i)
        any_difference |= (a.runs[i].sharpe_ratio != c.runs[i].sharpe_ratio);
    CHECK(any_difference);
}

TEST_CASE("noise-injecting schemes report their strengths") {
    const pipeline_config cfg = tiny_config();
    const price_series series = series_for(cfg, 19);
    const pipeline_seed_run run = run_pipeline_once(series, cfg, 7);

    CHECK(run.runs[0].strength == 0.0);  // plain
    CHECK(run.runs[1].strength == 0.0);  // weight decay injects nothing
    for (std::size_t i = 2; i < run.runs.size(); ++i) {
        if (!run.runs[i].strength_unavailable) CHECK(run.runs[i].strength > 0.0);
    }
    // The proposed scheme's reported strength is the configured factor.
    if (!run.runs[4].strength_unavailable)
        CHECK(run.runs[4].strength == cfg.c);
}

TEST_CASE("a series shorter than both splits is rejected") {
    const pipeline_config cfg = tiny_config();
    price_series series = series_for(cfg, 23);
    series.prices.resize(cfg.train_len + cfg.test_len);  // one short
    CHECK_THROWS_AS(run_pipeline_once(series, cfg, 1), series_too_short);
}

TEST_CASE("the long-only constraint keeps every traded position in [0, 1]") {
    pipeline_config cfg = tiny_config();
    cfg.constraint = box_constraint::long_only;
    const price_series series = series_for(cfg, 29);
    const pipeline_seed_run run = run_pipeline_once(series, cfg, 5);
    for (const scheme_run& sr : run.runs)
        for (const double p : sr.trajectory.positions) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
}

TEST_CASE("the fixed-series comparison varies only training randomness") {
    pipeline_config cfg = tiny_config();
    cfg.n_seeds = 2;
    const price_series series = series_for(cfg, 31);

    const pipeline_report rep = run_pipeline(cfg, series);
    REQUIRE(rep.seeds.size() == 2);
    CHECK(rep.seeds[0].run_seed != rep.seeds[1].run_seed);
    REQUIRE(rep.mean_sharpe.size() == pipeline_scheme_order().size());

    // The aggregate really is the mean across seeds, scheme by scheme.
    for (std::size_t k = 0; k < rep.mean_sharpe.size(); ++k) {
        double m = 0.0;
        for (const pipeline_seed_run& sr : rep.seeds)
            m += sr.runs[k].sharpe_ratio;
        m /= static_cast<double>(rep.seeds.size());
        CHECK(rep.mean_sharpe[k] == doctest::Approx(m).epsilon(1e-15));
    }
}

TEST_CASE("the simulated comparison is reproducible end to end") {
    pipeline_config cfg = tiny_config();
    cfg.n_seeds = 2;
    const pipeline_report a = run_pipeline(cfg);
    const pipeline_report b = run_pipeline(cfg);
    REQUIRE(a.seeds.size() == 2);
    CHECK(a.mean_sharpe == b.mean_sharpe);
    for (std::size_t s = 0; s < a.seeds.size(); ++s)
        for (std::size_t k = 0; k < a.seeds[s].runs.size(); ++k)
            CHECK(a.seeds[s].runs[k].sharpe_ratio ==
                  b.seeds[s].runs[k].sharpe_ratio);

    // A different root seed produces different series, hence different runs.
    pipeline_config other = cfg;
    other.seed = cfg.seed + 1;
    const pipeline_report c = run_pipeline(other);
    bool any_difference = false;
    for (std::size_t k = 0; k < a.mean_sharpe.size(); ++k)
        any_difference |= (a.mean_sharpe[k] != c.mean_sharpe[k]);
    CHECK(any_difference);
}
