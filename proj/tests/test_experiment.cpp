#include "doctest.h"

#include <cmath>

#include "rbe/experiment.hpp"
#include "rbe/io.hpp"

using namespace rbe;
using json = nlohmann::json;

namespace {

json base_config() {
    return json::parse(R"({
        "experiment": "linreg",
        "generator": {"name": "piecewise_linreg", "params": {"T": 200, "noise": "student", "p_eps": 0.01}},
        "seeds": [0, 1],
        "methods": [{"name": "c_static"}, {"name": "rl_pr", "id": "rlpr", "params": {"K": 3, "hazard": 0.01}}],
        "model": {"r": 1.0}
    })");
}

std::vector<MethodRun> run_all(const ExperimentConfig& cfg) {
    std::vector<MethodRun> runs;
    for (const auto& m : cfg.methods)
        for (auto s : cfg.seeds) runs.push_back(run_method(cfg, m, s));
    return runs;
}

bool same_summary(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [k, v] : a) {
        if (!b.count(k)) return false;
        const double w = b.at(k);
        if (std::isnan(v) != std::isnan(w)) return false;
        if (!std::isnan(v) && std::abs(v - w) > 1e-12 * std::max(1.0, std::abs(v))) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("config validation") {
    json j = base_config();
    CHECK_NOTHROW(parse_config(j));
    j["bogus"] = 1;
    CHECK_THROWS_WITH(parse_config(j), doctest::Contains("bogus"));
    j = base_config();
    j["generator"]["params"]["speed"] = 3;
    CHECK_THROWS_WITH(parse_config(j), doctest::Contains("speed"));
    j = base_config();
    j["methods"] = json::array();
    CHECK_THROWS_WITH(parse_config(j), doctest::Contains("method list is empty"));
    CHECK_NOTHROW(parse_config(j, false));
    j = base_config();
    j["methods"][1]["id"] = "c_static";
    CHECK_THROWS_WITH(parse_config(j), doctest::Contains("duplicate"));
    j = base_config();
    j["seeds"] = json::array({-1});
    CHECK_THROWS(parse_config(j));
    j = base_config();
    j["experiment"] = "nope";
    CHECK_THROWS(parse_config(j));
    j = base_config();
    j["generator"]["name"] = "nope";
    CHECK_THROWS(parse_config(j));
}

TEST_CASE("unknown method parameters and model keys fail the run") {
    json j = base_config();
    j["methods"][0]["params"] = {{"hazzard", 0.1}};
    const ExperimentConfig cfg = parse_config(j);
    const MethodRun r = run_method(cfg, cfg.methods[0], 0);
    CHECK(r.error.find("hazzard") != std::string::npos);

    j = base_config();
    j["model"]["widths"] = 3;
    const ExperimentConfig c2 = parse_config(j);
    CHECK(run_method(c2, c2.methods[0], 0).error.find("widths") != std::string::npos);
}

TEST_CASE("one method and seed gives one summary entry") {
    json j = base_config();
    j["seeds"] = json::array({5});
    j["methods"] = json::array({j["methods"][0]});
    const ExperimentConfig cfg = parse_config(j);
    const json s = summarize(cfg, run_all(cfg));
    REQUIRE(s["methods"].size() == 1);
    CHECK(s["methods"][0]["id"] == "c_static");
    CHECK(s["methods"][0]["seeds"] == json::array({5}));
    for (const auto& [k, v] : s["methods"][0]["metrics"].items()) {
        CHECK(v["per_seed"].size() == 1);
        CHECK(v["mean"] == v["median"]);
        CHECK(v["iqr"] == 0.0);
    }
    CHECK(s["experiment"] == "linreg");
    CHECK(s["config"] == j);
}

TEST_CASE("zero-length deploy gives a valid summary") {
    json j = base_config();
    j["generator"]["params"]["T"] = 0;
    const ExperimentConfig cfg = parse_config(j);
    const std::vector<MethodRun> runs = run_all(cfg);
    for (const auto& r : runs) {
        CHECK(r.error.empty());
        CHECK(r.rows.empty());
    }
    const json s = summarize(cfg, runs);
    CHECK(s["methods"].size() == 2);
    const std::string text = s.dump();
    const json back = json::parse(text);
    CHECK(back.dump() == text);
    CHECK(back["methods"][0]["metrics"]["rmse"]["mean"].is_null());
    CHECK(metrics_to_csv(runs) == "method,seed,t," + [&] {
              std::string h;
              for (std::size_t i = 0; i < runs[0].columns.size(); ++i) h += (i ? "," : "") + runs[0].columns[i];
              return h;
          }() + "\n");

    j["generator"]["params"]["T"] = 5;
    j["warmup"] = 5;
    const ExperimentConfig w = parse_config(j);
    CHECK(run_method(w, w.methods[0], 0).rows.empty());
}

TEST_CASE("repeat runs give identical csv bytes") {
    const ExperimentConfig cfg = parse_config(base_config());
    CHECK(metrics_to_csv(run_all(cfg)) == metrics_to_csv(run_all(cfg)));
    CHECK(summarize(cfg, run_all(cfg)).dump() == summarize(cfg, run_all(cfg)).dump());
}

TEST_CASE("summaries replay from the metrics csv") {
    const std::vector<json> configs = {
        base_config(),
        json::parse(R"({"experiment": "tracking2d", "generator": {"name": "tracking2d", "params": {"T": 100}},
                        "methods": [{"name": "kf"}, {"name": "wolf", "params": {"weighting": "imq", "c": 5}}]})"),
        json::parse(R"({"experiment": "classification", "generator": {"name": "periodic_drift_clf", "params": {"T": 120}},
                        "methods": [{"name": "rl1_oupr", "params": {"hazard": 0.1, "eps": 0.5}}]})"),
        json::parse(R"({"experiment": "returns",
                        "generator": {"name": "dji_like_returns", "params": {"T": 80, "outlier_times": [40], "outlier_values": [0.5]}},
                        "methods": [{"name": "ewma", "params": {"beta": 0.1}}]})"),
        json::parse(R"({"experiment": "bandit", "generator": {"name": "bernoulli_bandit", "params": {"T": 100, "arms": 3}},
                        "methods": [{"name": "beta"}, {"name": "c_static"}]})"),
    };
    for (const json& j : configs) {
        const ExperimentConfig cfg = parse_config(j);
        const std::vector<MethodRun> runs = run_all(cfg);
        const MetricsTable table = metrics_from_csv(metrics_to_csv(runs));
        for (const MethodRun& r : runs) {
            REQUIRE(r.error.empty());
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < table.rows.size(); ++i) {
                if (table.method[i] == r.method_id && table.seed[i] == r.seed) rows.push_back(table.rows[i]);
            }
            CHECK(same_summary(summarize_rows(cfg.experiment, table.columns, rows), r.summary));
        }
    }
}

TEST_CASE("metric filter") {
    json j = base_config();
    j["metrics"] = json::array({"rmse"});
    ExperimentConfig cfg = parse_config(j);
    const MethodRun r = run_method(cfg, cfg.methods[0], 0);
    CHECK(r.summary.size() == 1);
    CHECK(r.summary.count("rmse") == 1);
    j["metrics"] = json::array({"nonsense"});
    cfg = parse_config(j);
    CHECK(!run_method(cfg, cfg.methods[0], 0).error.empty());
}

TEST_CASE("quantile interpolation") {
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({7.0}, 0.9) == 7.0);
    CHECK(quantile({1.0, 5.0}, 1.0) == 5.0);
}
