#include "rbe/learners.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace rbe {

namespace {

using json = nlohmann::json;

/// Typed access to a JSON object that rejects keys outside an allowed set.
class Params {
public:
    Params(const json& j, const std::string& owner, std::set<std::string> allowed) : j_(j) {
        if (j_.is_null()) return;
        if (!j_.is_object()) {
            throw std::invalid_argument(owner + ": params must be an object");
        }
        for (const auto& [k, v] : j_.items()) {
            (void)v;
            if (!allowed.count(k)) {
                throw std::invalid_argument(owner + ": unknown parameter '" + k + "'");
            }
        }
    }

    double num(const std::string& k, double def) const {
        if (j_.is_null() || !j_.contains(k)) return def;
        if (!j_.at(k).is_number()) throw std::invalid_argument("parameter '" + k + "' must be a number");
        return j_.at(k).get<double>();
    }

    int integer(const std::string& k, int def) const {
        if (j_.is_null() || !j_.contains(k)) return def;
        if (!j_.at(k).is_number_integer()) throw std::invalid_argument("parameter '" + k + "' must be an integer");
        return j_.at(k).get<int>();
    }

    bool flag(const std::string& k, bool def) const {
        if (j_.is_null() || !j_.contains(k)) return def;
        if (!j_.at(k).is_boolean()) throw std::invalid_argument("parameter '" + k + "' must be a boolean");
        return j_.at(k).get<bool>();
    }

private:
    const json& j_;
};

const std::set<std::string> kWeightKeys = {"weighting", "c"};

std::set<std::string> with_weighting(std::set<std::string> keys) {
    keys.insert(kWeightKeys.begin(), kWeightKeys.end());
    return keys;
}

UpdateFn update_for(const LearnerContext& ctx, const WeightingFn& fn) {
    if (fn.kind == WeightingFn::Kind::constant && fn.w == 1.0) {
        return make_ekf_update(ctx.model);
    }
    return make_wolf_update(ctx.model, fn);
}

// -- Filters -----------------------------------------------------------------

class FilterLearner : public OnlineLearner {
public:
    FilterLearner(const LearnerContext& ctx, WeightingFn fn)
        : model_(ctx.model), trans_(ctx.trans), fn_(fn), belief_(ctx.anchor) {}

    Vec predict(const Vec& x) const override { return model_.mean(kf_predict(belief_, trans_).mean, x); }
    void update(const Vec& x, const Vec& y) override {
        belief_ = wolf_ekf_step(belief_, trans_, model_, x, y, fn_).belief;
    }
    Vec mean() const override { return belief_.mean; }

private:
    MeasurementModel model_;
    TransitionModel trans_;
    WeightingFn fn_;
    GaussianBelief belief_;
};

class EnkfLearner : public OnlineLearner {
public:
    EnkfLearner(const LearnerContext& ctx, int samples)
        : model_(ctx.model), trans_(ctx.trans), rng_(make_rng(ctx.seed, "enkf")) {
        ens_ = make_ensemble(ctx.anchor, samples, rng_);
    }

    Vec predict(const Vec& x) const override {
        Vec m = ens_.mean();
        if (!trans_.identity) m = trans_.F * m + trans_.b;
        return model_.mean(m, x);
    }
    void update(const Vec& x, const Vec& y) override { ens_ = enkf_step(ens_, trans_, model_, x, y, rng_); }
    Vec mean() const override { return ens_.mean(); }

private:
    MeasurementModel model_;
    TransitionModel trans_;
    Rng rng_;
    Ensemble ens_;
};

class RvgaLearner : public OnlineLearner {
public:
    RvgaLearner(const LearnerContext& ctx, RvgaConfig cfg)
        : model_(ctx.model), trans_(ctx.trans), cfg_(cfg), rng_(make_rng(ctx.seed, "rvga")), belief_(ctx.anchor) {}

    Vec predict(const Vec& x) const override { return model_.mean(kf_predict(belief_, trans_).mean, x); }
    void update(const Vec& x, const Vec& y) override {
        belief_ = rvga_step(kf_predict(belief_, trans_), model_, x, y, cfg_, rng_);
    }
    Vec mean() const override { return belief_.mean; }

private:
    MeasurementModel model_;
    TransitionModel trans_;
    RvgaConfig cfg_;
    Rng rng_;
    GaussianBelief belief_;
};

class LofiLearner : public OnlineLearner {
public:
    LofiLearner(const LearnerContext& ctx, int rank, double q) : model_(ctx.model), q_(q) {
        if (rank < 1) throw std::invalid_argument("lofi: rank must be at least 1");
        const Eigen::Index D = ctx.anchor.dim();
        b_ = DlrPrecisionBelief(ctx.anchor.mean, ctx.anchor.cov.diagonal().cwiseInverse(), Mat::Zero(D, rank));
    }

    Vec predict(const Vec& x) const override { return model_.mean(b_.mean, x); }
    void update(const Vec& x, const Vec& y) override { b_ = lofi_update(lofi_predict(b_, q_), model_, x, y); }
    Vec mean() const override { return b_.mean; }

private:
    MeasurementModel model_;
    double q_;
    DlrPrecisionBelief b_;
};

AdamConfig adam_from(const Params& p) {
    AdamConfig cfg;
    cfg.epochs = p.integer("epochs", 50);
    cfg.batch_size = p.integer("batch", 32);
    cfg.lr = p.num("lr", 1e-2);
    cfg.skip = p.integer("skip", 0);
    cfg.stride = p.integer("stride", 1);
    return cfg;
}

const std::set<std::string> kWarmupKeys = {"rank", "epochs", "lr", "batch", "skip", "stride", "prior_var", "q"};

AdamResult warm_up(const LearnerContext& ctx, const AdamConfig& cfg) {
    if (!ctx.has_mlp || ctx.warmup == nullptr || ctx.warmup->size() == 0) {
        throw std::invalid_argument("subspace methods need an MLP model and warm-up data");
    }
    Rng rng = make_rng(ctx.seed, "warmup");
    return adam_train(ctx.model, ctx.anchor.mean, ctx.warmup->X, ctx.warmup->Y, cfg, rng);
}

class SubspaceLearner : public OnlineLearner {
public:
    SubspaceLearner(const LearnerContext& ctx, const Params& p)
        : model_(ctx.model),
          trans_(TransitionModel::random_walk(p.integer("rank", 10), p.num("q", 0.0))) {
        const AdamResult warm = warm_up(ctx, adam_from(p));
        map_ = build_subspace(warm.iterates, warm.theta_final, p.integer("rank", 10));
        belief_ = GaussianBelief(Vec::Zero(map_.dim()), p.num("prior_var", 1.0) * Mat::Identity(map_.dim(), map_.dim()));
    }

    Vec predict(const Vec& x) const override { return model_.mean(map_.embed(belief_.mean), x); }
    void update(const Vec& x, const Vec& y) override {
        belief_ = subspace_ekf_step(belief_, map_, trans_, model_, x, y).belief;
    }
    Vec mean() const override { return map_.embed(belief_.mean); }

private:
    MeasurementModel model_;
    TransitionModel trans_;
    SubspaceMap map_;
    GaussianBelief belief_;
};

class PulseLearner : public OnlineLearner {
public:
    PulseLearner(const LearnerContext& ctx, const Params& p) : model_(ctx.model), q_(p.num("q", 0.0)) {
        const AdamResult warm = warm_up(ctx, adam_from(p));
        const Eigen::Index D = warm.theta_final.size();
        const Eigen::Index dl = ctx.mlp.last_layer_params();
        const Eigen::Index dh = D - dl;
        const int rank = p.integer("rank", 10);
        const double v = p.num("prior_var", 1.0);
        bb_.map = build_subspace(warm.iterates.leftCols(dh), warm.theta_final.head(dh), rank);
        bb_.hidden = GaussianBelief(Vec::Zero(rank), v * Mat::Identity(rank, rank));
        bb_.last = GaussianBelief(warm.theta_final.tail(dl), v * Mat::Identity(dl, dl));
    }

    Vec predict(const Vec& x) const override { return model_.mean(bb_.full_params(), x); }
    void update(const Vec& x, const Vec& y) override {
        if (q_ > 0.0) {
            bb_.hidden = apply_conditional_prior(ConditionalPrior::aci(q_), bb_.hidden);
            bb_.last = apply_conditional_prior(ConditionalPrior::aci(q_), bb_.last);
        }
        bb_ = pulse_step(bb_, model_, x, y);
    }
    Vec mean() const override { return bb_.full_params(); }

private:
    MeasurementModel model_;
    double q_;
    BlockBelief bb_;
};

// -- BONE --------------------------------------------------------------------

class SingleStateLearner : public OnlineLearner {
public:
    SingleStateLearner(const LearnerContext& ctx, ConditionalPrior prior, UpdateFn update)
        : model_(ctx.model), prior_(std::move(prior)), update_(std::move(update)), belief_(ctx.anchor) {}

    Vec predict(const Vec& x) const override {
        return model_.mean(apply_conditional_prior(prior_, belief_).mean, x);
    }
    void update(const Vec& x, const Vec& y) override {
        belief_ = single_state_step(prior_, belief_, update_, x, y).belief;
    }
    Vec mean() const override { return belief_.mean; }

private:
    MeasurementModel model_;
    ConditionalPrior prior_;
    UpdateFn update_;
    GaussianBelief belief_;
};

class CppLearner : public OnlineLearner {
public:
    CppLearner(const LearnerContext& ctx, UpdateFn update)
        : model_(ctx.model), update_(std::move(update)), anchor_(ctx.anchor), belief_(ctx.anchor) {}

    Vec predict(const Vec& x) const override { return model_.mean(belief_.mean, x); }
    void update(const Vec& x, const Vec& y) override {
        const CppResult res = cpp_ou_step(belief_, cpp_, update_, x, y, anchor_);
        belief_ = res.belief;
        cpp_ = res.state;
    }
    Vec mean() const override { return belief_.mean; }

private:
    MeasurementModel model_;
    UpdateFn update_;
    GaussianBelief anchor_;
    GaussianBelief belief_;
    CppState cpp_;
};

class BankLearner : public OnlineLearner {
public:
    BankLearner(const LearnerContext& ctx, int K, double hazard, bool mmpr, UpdateFn update)
        : model_(ctx.model),
          update_(std::move(update)),
          anchor_(ctx.anchor),
          bank_(HypothesisBank::initial(ctx.anchor, K, hazard)),
          mmpr_(mmpr) {}

    Vec predict(const Vec& x) const override { return bone_predict(bank_, model_, x); }
    void update(const Vec& x, const Vec& y) override {
        bank_ = mmpr_ ? rl_mmpr_step(bank_, update_, x, y, anchor_) : rl_pr_step(bank_, update_, x, y, anchor_);
    }
    Vec mean() const override {
        const std::vector<double> w = bank_.weights();
        Vec m = Vec::Zero(anchor_.dim());
        for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * bank_.hyps[i].belief.mean;
        return m;
    }
    int runlength() const override { return bank_.map().r; }

private:
    MeasurementModel model_;
    UpdateFn update_;
    GaussianBelief anchor_;
    HypothesisBank bank_;
    bool mmpr_;
};

class OuprLearner : public OnlineLearner {
public:
    OuprLearner(const LearnerContext& ctx, double hazard, double eps, UpdateFn update)
        : model_(ctx.model),
          update_(std::move(update)),
          anchor_(ctx.anchor),
          state_{0, 0.0, ctx.anchor},
          hazard_(hazard),
          eps_(eps) {
        ConditionalPrior::oupr(hazard, eps, ctx.anchor);  // validates the ranges
    }

    Vec predict(const Vec& x) const override { return model_.mean(state_.belief.mean, x); }
    void update(const Vec& x, const Vec& y) override {
        state_ = rl1_oupr_step(state_, update_, x, y, anchor_, hazard_, eps_);
    }
    Vec mean() const override { return state_.belief.mean; }
    int runlength() const override { return state_.r; }

private:
    MeasurementModel model_;
    UpdateFn update_;
    GaussianBelief anchor_;
    RunlengthHypothesis state_;
    double hazard_;
    double eps_;
};

// -- Scalar smoothers --------------------------------------------------------

class EwmaLearner : public OnlineLearner {
public:
    EwmaLearner(double beta, double m0) : beta_(beta), m_(m0) {
        if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("ewma: beta must lie in (0, 1]");
    }
    Vec predict(const Vec&) const override { return Vec::Constant(1, m_); }
    void update(const Vec&, const Vec& y) override { m_ = plain_ewma_step(m_, y(0), beta_); }
    Vec mean() const override { return Vec::Constant(1, m_); }

private:
    double beta_;
    double m_;
};

class WolfEwmaLearner : public OnlineLearner {
public:
    explicit WolfEwmaLearner(EwmaState s) : s_(s) {
        if (!(s.s2 > 0.0) || !(s.c > 0.0) || !(s.r > 0.0) || s.q < 0.0) {
            throw std::invalid_argument("wolf_ewma: s0, r and c must be positive and q nonnegative");
        }
    }
    Vec predict(const Vec&) const override { return Vec::Constant(1, s_.m); }
    void update(const Vec&, const Vec& y) override { s_ = ewma_step(s_, y(0)); }
    Vec mean() const override { return Vec::Constant(1, s_.m); }

private:
    EwmaState s_;
};

}  // namespace

WeightingFn parse_weighting(const json& params) {
    std::string kind = "none";
    if (params.is_object() && params.contains("weighting")) {
        if (!params.at("weighting").is_string()) throw std::invalid_argument("weighting must be a string");
        kind = params.at("weighting").get<std::string>();
    }
    double c = 4.0;
    if (params.is_object() && params.contains("c")) {
        if (!params.at("c").is_number()) throw std::invalid_argument("c must be a number");
        c = params.at("c").get<double>();
    }
    if (kind == "none") return WeightingFn::constant(1.0);
    if (kind == "imq") return WeightingFn::imq(c);
    if (kind == "md") return WeightingFn::md(c);
    if (kind == "tmd") return WeightingFn::tmd(c);
    throw std::invalid_argument("unknown weighting '" + kind + "'");
}

const std::vector<std::string>& learner_names() {
    static const std::vector<std::string> names = {
        "kf",     "ekf",    "wolf",   "enkf",   "rvga",    "lofi",     "subspace_ekf", "pulse",     "c_static",
        "c_aci",  "c_ou",   "cpp_ou", "rl_pr",  "rl_mmpr", "rl1_oupr", "ewma",         "wolf_ewma"};
    return names;
}

std::unique_ptr<OnlineLearner> make_learner(const std::string& name, const json& params,
                                            const LearnerContext& ctx) {
    if (name == "kf" || name == "ekf") {
        Params p(params, name, {});
        return std::make_unique<FilterLearner>(ctx, WeightingFn::constant(1.0));
    }
    if (name == "wolf") {
        Params p(params, name, kWeightKeys);
        return std::make_unique<FilterLearner>(ctx, parse_weighting(params));
    }
    if (name == "enkf") {
        Params p(params, name, {"samples"});
        return std::make_unique<EnkfLearner>(ctx, p.integer("samples", 100));
    }
    if (name == "rvga") {
        Params p(params, name, {"iterations", "samples", "exact"});
        RvgaConfig cfg;
        cfg.inner_iterations = p.integer("iterations", 4);
        cfg.samples = p.integer("samples", 1000);
        cfg.exact = p.flag("exact", ctx.model.family == Family::gaussian);
        return std::make_unique<RvgaLearner>(ctx, cfg);
    }
    if (name == "lofi") {
        Params p(params, name, {"rank", "q"});
        return std::make_unique<LofiLearner>(ctx, p.integer("rank", 10), p.num("q", 0.0));
    }
    if (name == "subspace_ekf") {
        Params p(params, name, kWarmupKeys);
        return std::make_unique<SubspaceLearner>(ctx, p);
    }
    if (name == "pulse") {
        Params p(params, name, kWarmupKeys);
        return std::make_unique<PulseLearner>(ctx, p);
    }
    if (name == "c_static") {
        Params p(params, name, kWeightKeys);
        return std::make_unique<SingleStateLearner>(ctx, ConditionalPrior::static_prior(),
                                                    update_for(ctx, parse_weighting(params)));
    }
    if (name == "c_aci") {
        Params p(params, name, with_weighting({"q", "shrink"}));
        return std::make_unique<SingleStateLearner>(ctx, ConditionalPrior::aci(p.num("q", 1e-4), p.num("shrink", 1.0)),
                                                    update_for(ctx, parse_weighting(params)));
    }
    if (name == "c_ou") {
        Params p(params, name, with_weighting({"gamma"}));
        return std::make_unique<SingleStateLearner>(ctx, ConditionalPrior::ou(p.num("gamma", 0.99), ctx.anchor),
                                                    update_for(ctx, parse_weighting(params)));
    }
    if (name == "cpp_ou") {
        Params p(params, name, kWeightKeys);
        return std::make_unique<CppLearner>(ctx, update_for(ctx, parse_weighting(params)));
    }
    if (name == "rl_pr" || name == "rl_mmpr") {
        Params p(params, name, with_weighting({"K", "hazard"}));
        return std::make_unique<BankLearner>(ctx, p.integer("K", 1), p.num("hazard", 0.01), name == "rl_mmpr",
                                             update_for(ctx, parse_weighting(params)));
    }
    if (name == "rl1_oupr") {
        Params p(params, name, with_weighting({"hazard", "eps"}));
        return std::make_unique<OuprLearner>(ctx, p.num("hazard", 0.01), p.num("eps", 0.5),
                                             update_for(ctx, parse_weighting(params)));
    }
    if (name == "ewma") {
        Params p(params, name, {"beta", "m0"});
        return std::make_unique<EwmaLearner>(p.num("beta", 0.095), p.num("m0", 0.0));
    }
    if (name == "wolf_ewma") {
        Params p(params, name, {"m0", "s0", "q", "r", "c"});
        EwmaState s;
        s.m = p.num("m0", 0.0);
        const double s0 = p.num("s0", 1.0);
        s.s2 = s0 * s0;
        s.q = p.num("q", 0.01);
        s.r = p.num("r", 1.0);
        s.c = p.num("c", 0.05);
        return std::make_unique<WolfEwmaLearner>(s);
    }
    throw std::invalid_argument("unknown method '" + name + "'");
}

}  // namespace rbe
