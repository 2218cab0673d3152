#include "rbe/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "rbe/learners.hpp"

namespace rbe {

namespace {

using json = nlohmann::json;

/// Reads the "model" object, rejecting keys the experiment does not use.
class ModelKeys {
public:
    ModelKeys(const json& j, const std::string& experiment, std::set<std::string> allowed) : j_(j) {
        for (const auto& [k, v] : j_.items()) {
            (void)v;
            if (!allowed.count(k)) {
                throw std::invalid_argument("model: key '" + k + "' is not used by experiment " + experiment);
            }
        }
    }
    double num(const std::string& k, double def) const {
        if (!j_.contains(k)) return def;
        if (!j_.at(k).is_number()) throw std::invalid_argument("model: '" + k + "' must be a number");
        return j_.at(k).get<double>();
    }
    std::string str(const std::string& k, const std::string& def) const {
        if (!j_.contains(k)) return def;
        if (!j_.at(k).is_string()) throw std::invalid_argument("model: '" + k + "' must be a string");
        return j_.at(k).get<std::string>();
    }
    bool has(const std::string& k) const { return j_.contains(k); }
    const json& at(const std::string& k) const { return j_.at(k); }

private:
    const json& j_;
};

MlpSpec parse_mlp(const json& j, std::vector<int> default_widths) {
    MlpSpec spec;
    spec.widths = std::move(default_widths);
    if (j.is_null()) return spec;
    if (!j.is_object()) throw std::invalid_argument("model.mlp must be an object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (k != "widths" && k != "activation" && k != "leak") {
            throw std::invalid_argument("model.mlp: unknown key '" + k + "'");
        }
    }
    if (j.contains("widths")) {
        spec.widths = j.at("widths").get<std::vector<int>>();
        if (spec.widths.size() < 2 || *std::min_element(spec.widths.begin(), spec.widths.end()) < 1) {
            throw std::invalid_argument("model.mlp.widths needs at least two positive entries");
        }
    }
    const std::string act = j.value("activation", std::string("relu"));
    if (act == "relu") spec.activation = Activation::relu;
    else if (act == "leaky_relu") spec.activation = Activation::leaky_relu;
    else throw std::invalid_argument("model.mlp.activation must be relu or leaky_relu");
    spec.leak = j.value("leak", spec.leak);
    return spec;
}

Stream with_features(const Stream& s, const std::string& features) {
    if (features == "raw") return s;
    if (features != "quadratic") throw std::invalid_argument("model.features must be raw or quadratic");
    if (s.X.cols() != 1) throw DimensionError("quadratic features need scalar inputs");
    Stream out = s;
    out.X.resize(s.size(), 3);
    for (Eigen::Index t = 0; t < s.size(); ++t) {
        const double x = s.X(t, 0);
        out.X.row(t) << 1.0, x, x * x;
    }
    return out;
}

Stream slice(const Stream& s, Eigen::Index begin, Eigen::Index end) {
    Stream out;
    out.name = s.name;
    const Eigen::Index n = end - begin;
    out.X = s.X.middleRows(begin, n);
    out.Y = s.Y.middleRows(begin, n);
    if (s.theta.rows() == s.size()) out.theta = s.theta.middleRows(begin, n);
    if (s.clean.size() == s.size()) out.clean = s.clean.segment(begin, n);
    return out;
}

struct Recorder {
    MethodRun* run;
    void header(std::vector<std::string> cols) { run->columns = std::move(cols); }
    void row(long t, std::vector<double> values) {
        run->t.push_back(t);
        run->rows.push_back(std::move(values));
    }
};

void run_filter_experiment(const ExperimentConfig& cfg, const MethodSpec& method, std::uint64_t seed,
                           const Stream& raw, MethodRun& run) {
    const std::string& ex = cfg.experiment;
    LearnerContext ctx;
    Stream stream = raw;
    const Eigen::Index T = stream.size();
    const Eigen::Index start = std::min<Eigen::Index>(cfg.warmup, T);

    if (ex == "tracking2d") {
        if (cfg.generator != "tracking2d") throw std::invalid_argument("experiment tracking2d needs the tracking2d generator");
        ModelKeys m(cfg.model, ex, {"prior_var"});
        const double dt = cfg.generator_params.value("dt", Tracking2dParams{}.dt);
        const double q = cfg.generator_params.value("q", Tracking2dParams{}.q);
        const double r = cfg.generator_params.value("r", Tracking2dParams{}.r);
        ctx.model = MeasurementModel::linear(tracking2d_H(), r * Mat::Identity(2, 2));
        ctx.trans = TransitionModel::linear(tracking2d_F(dt), Vec::Zero(4), q * Mat::Identity(4, 4));
        ctx.anchor = GaussianBelief(Vec::Zero(4), m.num("prior_var", 1.0) * Mat::Identity(4, 4));
    } else if (ex == "linreg" || ex == "returns") {
        ModelKeys m(cfg.model, ex, {"r", "q", "prior_var", "prior_mean", "features"});
        if (ex == "linreg") stream = with_features(stream, m.str("features", "raw"));
        const double r = m.num("r", 1.0);
        Eigen::Index D = stream.X.cols();
        if (ex == "returns") {
            if (stream.Y.cols() != 1) throw DimensionError("returns experiment needs a scalar stream");
            D = 1;
            ctx.model = MeasurementModel::linear(Mat::Identity(1, 1), Mat::Constant(1, 1, r));
        } else {
            if (D < 1) throw DimensionError("linreg needs inputs");
            ctx.model = MeasurementModel::linear_regression(r);
        }
        ctx.trans = TransitionModel::random_walk(D, m.num("q", 0.0));
        ctx.anchor = GaussianBelief(Vec::Constant(D, m.num("prior_mean", 0.0)),
                                    m.num("prior_var", 1.0) * Mat::Identity(D, D));
    } else if (ex == "classification" || ex == "mlp_regression") {
        const bool clf = ex == "classification";
        ModelKeys m(cfg.model, ex, {"r", "q", "prior_var", "mlp"});
        const double q = m.num("q", clf ? 0.0 : 1e-4);
        Rng init = make_rng(seed, "mlp_init");
        Vec mu0;
        if (clf && !m.has("mlp")) {
            ctx.model = MeasurementModel::logistic();
            mu0 = Vec::Zero(stream.X.cols());
        } else {
            ctx.has_mlp = true;
            std::vector<int> def = {static_cast<int>(stream.X.cols()), 10, 10, 1};
            ctx.mlp = parse_mlp(m.has("mlp") ? m.at("mlp") : json(), def);
            if (ctx.mlp.input_dim() != stream.X.cols() || ctx.mlp.output_dim() != 1) {
                throw DimensionError("model.mlp widths must start at the input dimension and end at 1");
            }
            ctx.model = clf ? mlp_model(ctx.mlp, Family::bernoulli)
                            : mlp_model(ctx.mlp, Family::gaussian, Mat::Constant(1, 1, m.num("r", 1.0)));
            mu0 = mlp_init(ctx.mlp, init);
        }
        const Eigen::Index D = mu0.size();
        ctx.trans = TransitionModel::random_walk(D, q);
        ctx.anchor = GaussianBelief(mu0, m.num("prior_var", 1.0) * Mat::Identity(D, D));
    }

    const Stream warm = slice(stream, 0, start);
    ctx.warmup = &warm;
    ctx.seed = seed;
    std::unique_ptr<OnlineLearner> learner = make_learner(method.name, method.params, ctx);

    const auto t0 = std::chrono::steady_clock::now();
    const PrequentialTrace tr = run_prequential(*learner, stream, start);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const Eigen::Index n = tr.predictions.rows();
    Recorder rec{&run};

    if (ex == "tracking2d") {
        rec.header({"yhat_0", "yhat_1", "err_0", "err_1", "err_2", "err_3"});
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index t = start + i;
            std::vector<double> v = {tr.predictions(i, 0), tr.predictions(i, 1)};
            for (int c = 0; c < 4; ++c) v.push_back(tr.means(i, c) - stream.theta(t, c));
            rec.row(static_cast<long>(t), std::move(v));
        }
    } else if (ex == "linreg" || ex == "mlp_regression") {
        const bool has_clean = stream.clean.size() == T;
        std::vector<std::string> cols = {"yhat", "y", "err", "rolling_rmse", "runlength"};
        if (has_clean) cols.push_back("clean");
        rec.header(cols);
        std::vector<double> sq(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = stream.Y(start + i, 0) - tr.predictions(i, 0);
            sq[static_cast<std::size_t>(i)] = e * e;
        }
        const std::vector<double> roll = rolling_mean(sq, kRegressionWindow);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index t = start + i;
            const double yhat = tr.predictions(i, 0);
            const double y = stream.Y(t, 0);
            std::vector<double> v = {yhat, y, y - yhat, std::sqrt(roll[static_cast<std::size_t>(i)]),
                                     static_cast<double>(tr.runlengths[static_cast<std::size_t>(i)])};
            if (has_clean) v.push_back(stream.clean(t));
            rec.row(static_cast<long>(t), std::move(v));
        }
    } else if (ex == "classification") {
        rec.header({"p", "yhat", "y", "hit", "rolling_acc", "runlength"});
        std::vector<double> hits(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const int yhat = tr.predictions(i, 0) >= 0.5 ? 1 : 0;
            hits[static_cast<std::size_t>(i)] = yhat == static_cast<int>(std::lround(stream.Y(start + i, 0))) ? 1.0 : 0.0;
        }
        const std::vector<double> roll = rolling_mean(hits, kAccuracyWindow);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index t = start + i;
            const double p = tr.predictions(i, 0);
            rec.row(static_cast<long>(t),
                    {p, p >= 0.5 ? 1.0 : 0.0, stream.Y(t, 0), hits[static_cast<std::size_t>(i)],
                     roll[static_cast<std::size_t>(i)],
                     static_cast<double>(tr.runlengths[static_cast<std::size_t>(i)])});
        }
    } else if (ex == "returns") {
        rec.header({"y", "m", "dm", "outlier"});
        const bool flags = stream.outlier.size() == static_cast<std::size_t>(T);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index t = start + i;
            const double m = tr.means(i, 0);
            const double prev = i == 0 ? tr.predictions(0, 0) : tr.means(i - 1, 0);
            const double o = flags ? static_cast<double>(stream.outlier[static_cast<std::size_t>(t)]) : 0.0;
            rec.row(static_cast<long>(t), {stream.Y(t, 0), m, m - prev, o});
        }
    }
}

std::unique_ptr<ArmAgent> make_arm(const MethodSpec& method, const ModelKeys& m) {
    const std::string& name = method.name;
    const json& p = method.params;
    auto check = [&](std::set<std::string> allowed) {
        for (const auto& [k, v] : p.items()) {
            (void)v;
            if (!allowed.count(k)) throw std::invalid_argument(name + ": unknown parameter '" + k + "'");
        }
    };
    if (name == "beta") {
        check({"a", "b"});
        return std::make_unique<BetaArm>(p.value("a", 1.0), p.value("b", 1.0));
    }
    GaussianArm::Config c;
    c.mean0 = m.num("mean0", c.mean0);
    c.var0 = m.num("var0", c.var0);
    c.r = m.num("r", c.r);
    if (name == "c_static") {
        check({});
        c.method = GaussianArm::Method::c_static;
    } else if (name == "c_aci") {
        check({"q"});
        c.method = GaussianArm::Method::c_aci;
        c.q = p.value("q", 1e-4);
    } else if (name == "rl_pr") {
        check({"K", "hazard"});
        c.method = GaussianArm::Method::rl_pr;
        c.K = p.value("K", 1);
        c.hazard = p.value("hazard", c.hazard);
    } else if (name == "rl1_oupr") {
        check({"hazard", "eps"});
        c.method = GaussianArm::Method::rl1_oupr;
        c.hazard = p.value("hazard", c.hazard);
        c.eps = p.value("eps", c.eps);
    } else if (name == "cpp_ou") {
        check({});
        c.method = GaussianArm::Method::cpp_ou;
    } else {
        throw std::invalid_argument("unknown bandit method '" + name + "'");
    }
    if (!(c.var0 > 0.0) || !(c.r > 0.0) || c.q < 0.0 || c.K < 1 || !(c.hazard > 0.0 && c.hazard < 1.0)) {
        throw std::invalid_argument(name + ": invalid arm parameters");
    }
    return std::make_unique<GaussianArm>(c);
}

void run_bandit_experiment(const ExperimentConfig& cfg, const MethodSpec& method, std::uint64_t seed,
                           const Stream& stream, MethodRun& run) {
    if (cfg.generator != "bernoulli_bandit") throw std::invalid_argument("experiment bandit needs the bernoulli_bandit generator");
    ModelKeys m(cfg.model, "bandit", {"mean0", "var0", "r"});
    make_arm(method, m);  // validate before running
    const ArmFactory factory = [&]() { return make_arm(method, m); };
    const auto t0 = std::chrono::steady_clock::now();
    const BanditResult res = thompson_bandit_loop(factory, stream, seed);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Recorder rec{&run};
    rec.header({"arm", "reward", "regret"});
    for (std::size_t t = 0; t < res.arms.size(); ++t) {
        rec.row(static_cast<long>(t), {static_cast<double>(res.arms[t]), res.rewards[t], res.regret[t]});
    }
}

std::size_t column(const std::vector<std::string>& cols, const std::string& name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw std::invalid_argument("missing column '" + name + "'");
    return static_cast<std::size_t>(it - cols.begin());
}

}  // namespace

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::map<std::string, double> summarize_rows(const std::string& ex, const std::vector<std::string>& cols,
                                             const std::vector<std::vector<double>>& rows) {
    std::map<std::string, double> s;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(rows.size());
    if (ex == "tracking2d") {
        for (int c = 0; c < 4; ++c) {
            const std::size_t k = column(cols, "err_" + std::to_string(c));
            double acc = 0.0;
            for (const auto& r : rows) acc += r[k] * r[k];
            s["J_" + std::to_string(c)] = std::sqrt(acc);
        }
    } else if (ex == "linreg" || ex == "mlp_regression") {
        const std::size_t ke = column(cols, "err");
        std::vector<double> errs;
        double se = 0.0;
        double ae = 0.0;
        for (const auto& r : rows) {
            errs.push_back(r[ke]);
            se += r[ke] * r[ke];
            ae += std::abs(r[ke]);
        }
        s["rmse"] = rows.empty() ? nan : std::sqrt(se / n);
        s["mae"] = rows.empty() ? nan : ae / n;
        s["rmedse"] = rows.empty() ? nan : rmedse(errs);
        if (std::find(cols.begin(), cols.end(), "clean") != cols.end()) {
            const std::size_t kc = column(cols, "clean");
            const std::size_t ky = column(cols, "yhat");
            double sc = 0.0;
            for (const auto& r : rows) sc += (r[ky] - r[kc]) * (r[ky] - r[kc]);
            s["rmse_clean"] = rows.empty() ? nan : std::sqrt(sc / n);
        }
    } else if (ex == "classification") {
        const std::size_t kh = column(cols, "hit");
        double hits = 0.0;
        for (const auto& r : rows) hits += r[kh];
        s["accuracy"] = rows.empty() ? nan : hits / n;
        s["misclassification"] = rows.empty() ? nan : 1.0 - hits / n;
    } else if (ex == "returns") {
        const std::size_t kd = column(cols, "dm");
        const std::size_t ky = column(cols, "y");
        const std::size_t ko = column(cols, "outlier");
        double all = 0.0;
        double abs_o = 0.0;
        double rel_o = 0.0;
        for (const auto& r : rows) {
            all = std::max(all, std::abs(r[kd]));
            if (r[ko] != 0.0) {
                abs_o = std::max(abs_o, std::abs(r[kd]));
                rel_o = std::max(rel_o, std::abs(r[kd]) / std::abs(r[ky]));
            }
        }
        s["max_abs_dm"] = all;
        s["max_abs_dm_outlier"] = abs_o;
        s["max_rel_dm_outlier"] = rel_o;
    } else if (ex == "bandit") {
        s["final_regret"] = rows.empty() ? 0.0 : rows.back()[column(cols, "regret")];
    } else {
        throw std::invalid_argument("unknown experiment '" + ex + "'");
    }
    return s;
}

MethodRun run_method(const ExperimentConfig& cfg, const MethodSpec& method, std::uint64_t seed) {
    MethodRun run;
    run.method_id = method.id;
    run.seed = seed;
    try {
        const Stream stream = make_stream(cfg.generator, cfg.generator_params, seed);
        if (cfg.experiment == "bandit") {
            run_bandit_experiment(cfg, method, seed, stream, run);
        } else {
            run_filter_experiment(cfg, method, seed, stream, run);
        }
        run.summary = summarize_rows(cfg.experiment, run.columns, run.rows);
        if (!cfg.metrics.empty()) {
            std::map<std::string, double> kept;
            for (const std::string& m : cfg.metrics) {
                const auto it = run.summary.find(m);
                if (it == run.summary.end()) {
                    throw std::invalid_argument("metric '" + m + "' is not produced by experiment " + cfg.experiment);
                }
                kept.insert(*it);
            }
            run.summary = std::move(kept);
        }
    } catch (const std::exception& e) {
        run.columns.clear();
        run.t.clear();
        run.rows.clear();
        run.summary.clear();
        run.error = e.what();
    }
    return run;
}

json summarize(const ExperimentConfig& cfg, const std::vector<MethodRun>& runs) {
    json doc;
    doc["experiment"] = cfg.experiment;
    doc["generator"] = {{"name", cfg.generator}, {"params", cfg.generator_params}};
    doc["config"] = cfg.raw;
    json methods = json::array();
    for (const MethodSpec& spec : cfg.methods) {
        json jm;
        jm["id"] = spec.id;
        jm["name"] = spec.name;
        jm["params"] = spec.params;
        json seeds = json::array();
        json failed = json::array();
        std::map<std::string, std::vector<double>> per_metric;
        for (std::uint64_t seed : cfg.seeds) {
            for (const MethodRun& r : runs) {
                if (r.method_id != spec.id || r.seed != seed) continue;
                if (!r.error.empty()) {
                    failed.push_back({{"seed", seed}, {"error", r.error}});
                    continue;
                }
                seeds.push_back(seed);
                for (const auto& [k, v] : r.summary) per_metric[k].push_back(v);
            }
        }
        json metrics = json::object();
        for (const auto& [k, vals] : per_metric) {
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            metrics[k] = {{"mean", mean},
                          {"median", quantile(vals, 0.5)},
                          {"iqr", quantile(vals, 0.75) - quantile(vals, 0.25)},
                          {"per_seed", vals}};
        }
        jm["seeds"] = seeds;
        jm["failed"] = failed;
        jm["metrics"] = metrics;
        methods.push_back(jm);
    }
    doc["methods"] = methods;
    return doc;
}

}  // namespace rbe
