#include "rbe/config.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace rbe {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw std::invalid_argument(where + " must be an object");
    }
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (!allowed.count(k)) {
            throw std::invalid_argument(where + ": unknown key '" + k + "'");
        }
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T def, const std::string& where) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(where + ": key '" + key + "' has the wrong type");
    }
}

int get_length(const json& p, const std::string& where, int def) {
    const int T = get_or<int>(p, "T", def, where);
    if (T < 0) throw std::invalid_argument(where + ": T must be nonnegative");
    return T;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"tracking2d",     "linreg",  "classification",
                                                   "mlp_regression", "returns", "bandit"};
    return names;
}

const std::vector<std::string>& generator_names() {
    static const std::vector<std::string> names = {
        "tracking2d",   "piecewise_linreg", "periodic_drift_clf", "drift_jumps_clf", "bernoulli_bandit",
        "sinusoidal_regression", "moons", "dependent_segments", "dji_like_returns"};
    return names;
}

ExperimentConfig parse_config(const json& j, bool require_methods) {
    reject_unknown(j, "config",
                   {"experiment", "generator", "seeds", "methods", "metrics", "warmup", "model", "output_dir", "grid"});
    ExperimentConfig cfg;
    cfg.raw = j;

    if (!j.contains("generator")) throw std::invalid_argument("config: missing 'generator'");
    const json& g = j.at("generator");
    reject_unknown(g, "generator", {"name", "params"});
    cfg.generator = get_or<std::string>(g, "name", "", "generator");
    const auto& gens = generator_names();
    if (std::find(gens.begin(), gens.end(), cfg.generator) == gens.end()) {
        throw std::invalid_argument("generator: unknown name '" + cfg.generator + "'");
    }
    if (g.contains("params")) cfg.generator_params = g.at("params");
    if (!cfg.generator_params.is_object()) throw std::invalid_argument("generator.params must be an object");
    // Validate generator parameters eagerly with a zero-length draw.
    {
        json probe = cfg.generator_params;
        probe["T"] = 0;
        if (cfg.generator == "dji_like_returns") {
            probe.erase("outlier_times");
            probe.erase("outlier_values");
        }
        make_stream(cfg.generator, probe, 0);
    }

    if (j.contains("experiment")) {
        cfg.experiment = get_or<std::string>(j, "experiment", "", "config");
        const auto& ex = experiment_names();
        if (std::find(ex.begin(), ex.end(), cfg.experiment) == ex.end()) {
            throw std::invalid_argument("config: unknown experiment '" + cfg.experiment + "'");
        }
    } else if (require_methods) {
        throw std::invalid_argument("config: missing 'experiment'");
    }

    if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        if (!s.is_array() || s.empty()) throw std::invalid_argument("config: 'seeds' must be a nonempty array");
        cfg.seeds.clear();
        for (const auto& v : s) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw std::invalid_argument("config: seeds must be nonnegative integers");
            cfg.seeds.push_back(v.get<std::uint64_t>());
        }
    }

    if (j.contains("methods")) {
        const json& m = j.at("methods");
        if (!m.is_array()) throw std::invalid_argument("config: 'methods' must be an array");
        std::set<std::string> ids;
        for (const auto& e : m) {
            reject_unknown(e, "method", {"name", "id", "params"});
            MethodSpec spec;
            spec.name = get_or<std::string>(e, "name", "", "method");
            if (spec.name.empty()) throw std::invalid_argument("method: missing 'name'");
            spec.id = get_or<std::string>(e, "id", spec.name, "method");
            if (e.contains("params")) spec.params = e.at("params");
            if (!spec.params.is_object()) throw std::invalid_argument("method " + spec.id + ": params must be an object");
            if (!ids.insert(spec.id).second) throw std::invalid_argument("method: duplicate id '" + spec.id + "'");
            cfg.methods.push_back(spec);
        }
    }
    if (require_methods && cfg.methods.empty()) {
        throw std::invalid_argument("config: method list is empty");
    }

    if (j.contains("metrics")) {
        const json& m = j.at("metrics");
        if (!m.is_array()) throw std::invalid_argument("config: 'metrics' must be an array of names");
        for (const auto& v : m) {
            if (!v.is_string()) throw std::invalid_argument("config: metric names must be strings");
            cfg.metrics.push_back(v.get<std::string>());
        }
    }
    cfg.warmup = get_or<int>(j, "warmup", 0, "config");
    if (cfg.warmup < 0) throw std::invalid_argument("config: warmup must be nonnegative");
    if (j.contains("model")) {
        cfg.model = j.at("model");
        if (!cfg.model.is_object()) throw std::invalid_argument("config: 'model' must be an object");
    }
    cfg.output_dir = get_or<std::string>(j, "output_dir", "out", "config");
    if (j.contains("grid")) {
        cfg.grid = j.at("grid");
        if (!cfg.grid.is_object() || cfg.grid.empty()) throw std::invalid_argument("config: 'grid' must be a nonempty object");
        for (const auto& [k, v] : cfg.grid.items()) {
            if (!v.is_array() || v.empty()) throw std::invalid_argument("grid: '" + k + "' must be a nonempty array");
        }
    }
    return cfg;
}

Stream make_stream(const std::string& generator, const json& p, std::uint64_t seed) {
    const std::string w = "generator " + generator;
    if (!p.is_object()) throw std::invalid_argument(w + ": params must be an object");
    if (generator == "tracking2d") {
        reject_unknown(p, w, {"variant", "T", "dt", "q", "r", "nu", "p_eps"});
        Tracking2dParams t;
        const std::string v = get_or<std::string>(p, "variant", "student", w);
        if (v == "student") t.variant = Tracking2dParams::Variant::student;
        else if (v == "mixture") t.variant = Tracking2dParams::Variant::mixture;
        else throw std::invalid_argument(w + ": variant must be student or mixture");
        t.T = get_length(p, w, t.T);
        t.dt = get_or<double>(p, "dt", t.dt, w);
        t.q = get_or<double>(p, "q", t.q, w);
        t.r = get_or<double>(p, "r", t.r, w);
        t.nu = get_or<double>(p, "nu", t.nu, w);
        t.p_eps = get_or<double>(p, "p_eps", t.p_eps, w);
        return gen_tracking2d(t, seed);
    }
    if (generator == "piecewise_linreg") {
        reject_unknown(p, w, {"noise", "dof", "p_eps", "T"});
        PiecewiseLinregParams t;
        const std::string n = get_or<std::string>(p, "noise", "gaussian", w);
        if (n == "gaussian") t.noise = PiecewiseLinregParams::Noise::gaussian;
        else if (n == "student") t.noise = PiecewiseLinregParams::Noise::student;
        else throw std::invalid_argument(w + ": noise must be gaussian or student");
        t.dof = get_or<double>(p, "dof", t.dof, w);
        t.p_eps = get_or<double>(p, "p_eps", t.p_eps, w);
        t.T = get_length(p, w, t.T);
        return gen_piecewise_linreg(t, seed);
    }
    if (generator == "periodic_drift_clf") {
        reject_unknown(p, w, {"T"});
        return gen_periodic_drift_clf(get_length(p, w, 720), seed);
    }
    if (generator == "drift_jumps_clf") {
        reject_unknown(p, w, {"T", "p_eps", "noise_sd"});
        DriftJumpsParams t;
        t.T = get_length(p, w, t.T);
        t.p_eps = get_or<double>(p, "p_eps", t.p_eps, w);
        t.noise_sd = get_or<double>(p, "noise_sd", t.noise_sd, w);
        return gen_drift_jumps_clf(t, seed);
    }
    if (generator == "bernoulli_bandit") {
        reject_unknown(p, w, {"arms", "T", "drift"});
        BanditParams t;
        t.arms = get_or<int>(p, "arms", t.arms, w);
        t.T = get_length(p, w, t.T);
        t.drift = get_or<double>(p, "drift", t.drift, w);
        return gen_bernoulli_bandit(t, seed);
    }
    if (generator == "sinusoidal_regression") {
        reject_unknown(p, w, {"sorted", "T", "p_eps"});
        SinusoidalParams t;
        t.sorted = get_or<bool>(p, "sorted", t.sorted, w);
        t.T = get_length(p, w, t.T);
        t.p_eps = get_or<double>(p, "p_eps", t.p_eps, w);
        return gen_sinusoidal_regression(t, seed);
    }
    if (generator == "moons") {
        reject_unknown(p, w, {"T", "noise"});
        return gen_moons(get_length(p, w, 1000), get_or<double>(p, "noise", 0.1, w), seed);
    }
    if (generator == "dependent_segments") {
        reject_unknown(p, w, {"T", "kappa", "dx", "noise"});
        DependentSegmentsParams t;
        t.T = get_length(p, w, t.T);
        t.kappa = get_or<double>(p, "kappa", t.kappa, w);
        t.dx = get_or<double>(p, "dx", t.dx, w);
        t.noise = get_or<double>(p, "noise", t.noise, w);
        return gen_dependent_segments(t, seed);
    }
    if (generator == "dji_like_returns") {
        reject_unknown(p, w, {"T", "sigma", "outlier_times", "outlier_values"});
        ReturnsParams t;
        t.T = get_length(p, w, t.T);
        t.sigma = get_or<double>(p, "sigma", t.sigma, w);
        t.outlier_times = get_or<std::vector<int>>(p, "outlier_times", {}, w);
        t.outlier_values = get_or<std::vector<double>>(p, "outlier_values", {}, w);
        return gen_dji_like_returns(t, seed);
    }
    throw std::invalid_argument("unknown generator '" + generator + "'");
}

}  // namespace rbe
