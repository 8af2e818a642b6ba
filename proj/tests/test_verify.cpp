#include <doctest.h>

#include <cmath>
#include <functional>

#include "ethlab/stats.hpp"
#include "ethlab/verify.hpp"

using namespace ethlab;

namespace {

ExperimentConfig small(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.n_list = {24};
    c.eta_grid = {0.5, 0.2};
    c.trials = 20;
    c.master_seed = 11;
    return c;
}

bool has_error_code(const std::function<void()>& fn, ErrorCode code, const std::string& text) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == code && std::string(e.what()).find(text) != std::string::npos;
    }
    return false;
}

}  // namespace

TEST_CASE("summaries and line fits") {
    const Summary s = summarize({1.0, 2.0, 3.0, 4.0, 10.0});
    CHECK(s.mean == doctest::Approx(4.0));
    CHECK(s.median == doctest::Approx(3.0));
    CHECK(s.max == 10.0);
    CHECK(s.min == 1.0);
    CHECK(s.std == doctest::Approx(std::sqrt(12.5)));
    CHECK(s.count == 5);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));

    const LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit_loglog({1, 10, 100}, {3, 0.3, 0.03}).slope == doctest::Approx(-1.0));
    CHECK(std::isnan(fit_loglog({1, 10, 100}, {3, 0.0, 0.03}).slope));

    CHECK(fraction_within({0.1, 0.5, 2.0, 0.3}, 1.0) == doctest::Approx(0.75));
}

TEST_CASE("half-sample agreement") {
    std::vector<double> steady, drift;
    for (int i = 0; i < 40; ++i) {
        steady.push_back(1.0 + 0.1 * std::sin(7.0 * i));
        drift.push_back(i < 20 ? 0.0 + 0.01 * std::sin(i) : 5.0 + 0.01 * std::cos(i));
    }
    CHECK(halves_agree(steady));
    CHECK_FALSE(halves_agree(drift));
}

TEST_CASE("bulk indices keep a margin from the edges") {
    QuantileTable q;
    q.n = 4;
    q.values = {-2.0, -1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0, 2.0};
    const auto idx = bulk_indices(q, {Interval{-1.2, 1.2}}, 0.4);
    CHECK(idx == std::vector<int>{1, 2, 3});
    const auto two = bulk_indices(q, {Interval{0.05, 0.3}, Interval{0.8, 3.0}}, 0.1);
    CHECK(two == std::vector<int>{1, 3, 4});
}

TEST_CASE("scan report pass logic") {
    ScanReport r;
    auto& g = r.stat(64, 0.1, 0.0, "x");
    for (int i = 0; i < 20; ++i) g.values.push_back(i < 19 ? 0.5 : 3.0);
    g.bound = 1.0;
    r.check("a", 0.5, 0.0, 1.0);
    r.check("info", 5.0, 0.0, 1.0, false);
    r.finalize();
    CHECK(g.fraction == doctest::Approx(0.95));
    CHECK(r.pass);
    REQUIRE(r.find("half_sample:x"));

    ScanReport bad = r;
    bad.check("b", 2.0, 0.0, 1.0);
    bad.finalize();
    CHECK_FALSE(bad.pass);

    ScanReport excl;
    excl.stat(128, 0.1, 0.0, "y").values = {1.0};
    excl.total_samples = 100;
    excl.excluded_samples = 2;
    excl.finalize();
    CHECK_FALSE(excl.pass);
    excl.stat(128, 0.1, 0.0, "y").n = 64;
    excl.checks.clear();
    excl.finalize();
    CHECK(excl.pass);  // informational below N = 128
}

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(R"({"experiment": "eth", "N_list": [32, 64], "delta": 0.3,
        "options": {"observable": "E-"}})");
    CHECK(c.n_list == std::vector<int>{32, 64});
    CHECK(c.delta_value() == doctest::Approx(0.3));
    CHECK(c.option<std::string>("observable", "") == "E-");
    CHECK(parse_config(dump_config(c)) == c);
    CHECK(c.etas_for(64).empty() == false);

    ExperimentConfig d = c;
    d.out_dir = "elsewhere";
    d.workers = 4;
    CHECK(d.hash() == c.hash());
    d.master_seed = 99;
    CHECK(d.hash() != c.hash());

    const auto etas = ExperimentConfig{}.etas_for(256);
    REQUIRE(etas.size() == 8);
    CHECK(etas.front() == doctest::Approx(1.0));
    CHECK(etas.back() == doctest::Approx(std::pow(256.0, -0.8)));

    CHECK(has_error_code([] { parse_config(R"({"experiment": "nope"})"); }, ErrorCode::ConfigError, "experiment"));
    CHECK(has_error_code([] { parse_config(R"({"N_list": [8]})"); }, ErrorCode::ConfigError, "experiment"));
    CHECK(has_error_code([] { parse_config(R"({"experiment": "eth", "kappa": 2})"); }, ErrorCode::ConfigError,
                         "kappa"));
    CHECK(has_error_code([] { parse_config(R"({"experiment": "eth", "trials": "x"})"); }, ErrorCode::ConfigError,
                         "trials"));
    CHECK(has_error_code([] { parse_config(R"({"experiment": "eth", "colour": 1})"); }, ErrorCode::ConfigError,
                         "colour"));
    CHECK(has_error_code([] { parse_config("{"); }, ErrorCode::ConfigError, "parse"));
    CHECK(has_error_code([] { load_config("/nonexistent/cfg.json"); }, ErrorCode::ConfigError, "cannot read"));
}

TEST_CASE("runs are deterministic and independent of the worker count") {
    ExperimentConfig c = small("single-law");
    const nlohmann::json a = run_experiment(c);
    c.workers = 3;
    const nlohmann::json b = run_experiment(c);
    CHECK(a == b);
    c.master_seed = 12;
    CHECK(nlohmann::json(run_experiment(c)) != a);
}

TEST_CASE("per-trial streams") {
    const ExperimentConfig c = small("eth");
    const SampleConfig s = trial_config(c, 24, 3);
    CHECK(s.n == 24);
    CHECK(s.seed == trial_config(c, 24, 3).seed);
    CHECK(s.seed != trial_config(c, 24, 4).seed);
    CHECK(s.seed != trial_config(c, 48, 3).seed);
}

TEST_CASE("identity suite passes") {
    ExperimentConfig c = small("identities");
    c.options = {{"n", 16}};
    const ScanReport r = run_experiment(c);
    for (const auto& ch : r.checks)
        if (ch.enforced && !ch.pass) MESSAGE(ch.name << " = " << ch.value);
    CHECK(r.pass);
}

TEST_CASE("recursion suite on small chains") {
    ExperimentConfig c = small("identities");
    c.options = {{"n", 6}, {"specs", 8}};
    const ScanReport r = run_recursion_suite(c);
    CHECK(r.pass);
    CHECK(r.experiment == "recursion");
}

TEST_CASE("density experiment") {
    ExperimentConfig c = small("density");
    c.n_list = {16};
    const ScanReport r = run_experiment(c);
    CHECK(r.pass);
    REQUIRE_FALSE(r.files.empty());
    CHECK(r.files.front().first == "density.csv");
}

TEST_CASE("unknown experiment names are rejected") {
    ExperimentConfig c = small("eth");
    c.experiment = "fourier";
    CHECK(has_error_code([&] { run_experiment(c); }, ErrorCode::ConfigError, "experiment"));
}
