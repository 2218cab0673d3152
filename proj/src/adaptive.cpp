#include "rbe/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double a : v) m = std::max(m, a);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double a : v) s += std::exp(a - m);
    return m + std::log(s);
}

GaussianBelief ou_blend(double g, const GaussianBelief& prev, const GaussianBelief& anchor) {
    if (anchor.dim() != prev.dim()) {
        throw DimensionError("conditional prior: anchor dimension mismatch");
    }
    return GaussianBelief(g * prev.mean + (1.0 - g) * anchor.mean, g * g * prev.cov + (1.0 - g * g) * anchor.cov);
}

void check_bank(const HypothesisBank& bank) {
    if (bank.hyps.empty()) {
        throw std::invalid_argument("hypothesis bank is empty");
    }
    if (bank.K < 1) {
        throw std::invalid_argument("hypothesis bank needs K >= 1");
    }
    if (!(bank.hazard > 0.0 && bank.hazard < 1.0)) {
        throw std::invalid_argument("hazard must lie in (0, 1)");
    }
}

HypothesisBank bank_step(const HypothesisBank& bank, const UpdateFn& update, const Vec& x, const Vec& y,
                         const GaussianBelief& reset_prior, const ConditionalPrior& continuation) {
    check_bank(bank);
    const double log_cont = std::log1p(-bank.hazard);
    const double log_cp = std::log(bank.hazard);

    HypothesisBank next;
    next.K = bank.K;
    next.hazard = bank.hazard;
    next.hyps.reserve(bank.hyps.size() + 1);

    std::vector<double> prev_joint;
    prev_joint.reserve(bank.hyps.size());
    for (const auto& h : bank.hyps) {
        prev_joint.push_back(h.log_joint);
        const UpdateResult res = update(apply_conditional_prior(continuation, h.belief), x, y);
        next.hyps.push_back({h.r + 1, h.log_joint + log_cont + res.loglik, res.belief});
    }
    const UpdateResult res0 = update(reset_prior, x, y);
    next.hyps.push_back({0, log_cp + logsumexp(prev_joint) + res0.loglik, res0.belief});

    bool any_finite = false;
    for (const auto& h : next.hyps) {
        if (std::isnan(h.log_joint)) {
            throw NumericalError("degenerate bank: NaN log-joint");
        }
        any_finite = any_finite || std::isfinite(h.log_joint);
    }
    if (!any_finite) {
        throw NumericalError("degenerate bank");
    }
    prune(next);
    return next;
}

}  // namespace

UpdateFn make_ekf_update(MeasurementModel model) {
    return [model = std::move(model)](const GaussianBelief& prior, const Vec& x, const Vec& y) {
        return ekf_update(prior, model, x, y);
    };
}

UpdateFn make_wolf_update(MeasurementModel model, WeightingFn fn) {
    return [model = std::move(model), fn](const GaussianBelief& prior, const Vec& x, const Vec& y) {
        return wolf_update_linearized(prior, linearize(model, prior.mean, x), y, fn);
    };
}

// -- Conditional priors ------------------------------------------------------

ConditionalPrior ConditionalPrior::static_prior() { return ConditionalPrior{}; }

ConditionalPrior ConditionalPrior::ou(double gamma, GaussianBelief anchor) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("ou: gamma must lie in [0, 1]");
    }
    ConditionalPrior p;
    p.kind = Kind::ou;
    p.gamma = gamma;
    p.anchor = std::move(anchor);
    return p;
}

ConditionalPrior ConditionalPrior::aci(double q, double shrink) {
    if (!(q >= 0.0)) {
        throw std::invalid_argument("aci: q must be nonnegative");
    }
    ConditionalPrior p;
    p.kind = Kind::aci;
    p.q = q;
    p.shrink = shrink;
    return p;
}

ConditionalPrior ConditionalPrior::cpp_ou(GaussianBelief anchor) {
    ConditionalPrior p;
    p.kind = Kind::cpp_ou;
    p.anchor = std::move(anchor);
    return p;
}

ConditionalPrior ConditionalPrior::prior_reset(GaussianBelief anchor) {
    ConditionalPrior p;
    p.kind = Kind::prior_reset;
    p.anchor = std::move(anchor);
    return p;
}

ConditionalPrior ConditionalPrior::mmpr(GaussianBelief anchor) {
    ConditionalPrior p;
    p.kind = Kind::mmpr;
    p.anchor = std::move(anchor);
    return p;
}

ConditionalPrior ConditionalPrior::oupr(double kappa, double eps, GaussianBelief anchor) {
    if (!(kappa > 0.0 && kappa < 1.0) || !(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("oupr: kappa and eps must lie in (0, 1)");
    }
    ConditionalPrior p;
    p.kind = Kind::oupr;
    p.kappa = kappa;
    p.eps = eps;
    p.anchor = std::move(anchor);
    return p;
}

GaussianBelief apply_conditional_prior(const ConditionalPrior& prior, const GaussianBelief& prev,
                                       const PriorContext& ctx) {
    using K = ConditionalPrior::Kind;
    switch (prior.kind) {
        case K::static_:
            return prev;
        case K::ou:
            return ou_blend(prior.gamma, prev, prior.anchor);
        case K::aci: {
            Mat cov = prev.cov;
            cov.diagonal().array() += prior.q;
            return GaussianBelief(prior.shrink * prev.mean, cov);
        }
        case K::cpp_ou:
            return ou_blend(std::clamp(ctx.upsilon, 0.0, 1.0), prev, prior.anchor);
        case K::prior_reset:
            return ctx.changepoint ? prior.anchor : prev;
        case K::mmpr: {
            if (!ctx.changepoint) {
                return prev;
            }
            if (ctx.bank == nullptr || ctx.bank->empty()) {
                return prior.anchor;
            }
            std::vector<GaussianBelief> comps;
            comps.reserve(ctx.bank->size());
            for (const auto& h : *ctx.bank) comps.push_back(h.belief);
            return moment_match(ctx.bank_weights, comps);
        }
        case K::oupr:
            if (ctx.nu > prior.eps) {
                return ou_blend(ctx.nu, prev, prior.anchor);
            }
            return prior.anchor;
    }
    throw std::logic_error("unknown conditional prior");
}

// -- Hypothesis bank ---------------------------------------------------------

HypothesisBank HypothesisBank::initial(const GaussianBelief& anchor, int K, double hazard) {
    HypothesisBank b;
    b.K = K;
    b.hazard = hazard;
    b.hyps.push_back({0, 0.0, anchor});
    check_bank(b);
    return b;
}

std::vector<double> HypothesisBank::weights() const {
    std::vector<double> lj;
    lj.reserve(hyps.size());
    for (const auto& h : hyps) lj.push_back(h.log_joint);
    const double z = logsumexp(lj);
    if (!std::isfinite(z)) {
        throw NumericalError("degenerate bank");
    }
    std::vector<double> w(hyps.size());
    double s = 0.0;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        w[i] = std::exp(lj[i] - z);
        s += w[i];
    }
    for (double& v : w) v /= s;
    return w;
}

const RunlengthHypothesis& HypothesisBank::map() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < hyps.size(); ++i) {
        const auto& a = hyps[i];
        const auto& b = hyps[best];
        if (a.log_joint > b.log_joint || (a.log_joint == b.log_joint && a.r > b.r)) {
            best = i;
        }
    }
    return hyps.at(best);
}

void prune(HypothesisBank& bank) {
    auto better = [](const RunlengthHypothesis& a, const RunlengthHypothesis& b) {
        if (a.log_joint != b.log_joint) return a.log_joint > b.log_joint;
        return a.r > b.r;
    };
    std::stable_sort(bank.hyps.begin(), bank.hyps.end(), better);
    if (static_cast<int>(bank.hyps.size()) > bank.K) {
        bank.hyps.resize(static_cast<std::size_t>(bank.K));
    }
}

HypothesisBank rl_pr_step(const HypothesisBank& bank, const UpdateFn& update, const Vec& x, const Vec& y,
                          const GaussianBelief& anchor, const ConditionalPrior& continuation) {
    return bank_step(bank, update, x, y, anchor, continuation);
}

HypothesisBank rl_mmpr_step(const HypothesisBank& bank, const UpdateFn& update, const Vec& x, const Vec& y,
                            const GaussianBelief& anchor, const ConditionalPrior& continuation) {
    check_bank(bank);
    PriorContext ctx;
    ctx.changepoint = true;
    ctx.bank = &bank.hyps;
    ctx.bank_weights = bank.weights();
    const GaussianBelief reset = apply_conditional_prior(ConditionalPrior::mmpr(anchor), anchor, ctx);
    return bank_step(bank, update, x, y, reset, continuation);
}

double oupr_weight(double loglik_reset, double loglik_continue, double kappa) {
    const double a = loglik_continue + std::log1p(-kappa);
    const double b = loglik_reset + std::log(kappa);
    const double m = std::max(a, b);
    if (!std::isfinite(m)) {
        throw NumericalError("oupr: both predictive densities vanish");
    }
    return std::exp(a - m) / (std::exp(a - m) + std::exp(b - m));
}

RunlengthHypothesis rl1_oupr_step(const RunlengthHypothesis& state, const UpdateFn& update, const Vec& x,
                                  const Vec& y, const GaussianBelief& anchor, double kappa, double eps) {
    const ConditionalPrior prior = ConditionalPrior::oupr(kappa, eps, anchor);
    const double ll1 = update(state.belief, x, y).loglik;
    const double ll0 = update(anchor, x, y).loglik;
    PriorContext ctx;
    ctx.nu = oupr_weight(ll0, ll1, kappa);
    const UpdateResult res = update(apply_conditional_prior(prior, state.belief, ctx), x, y);
    RunlengthHypothesis out;
    out.r = ctx.nu > eps ? state.r + 1 : 0;
    out.log_joint = 0.0;
    out.belief = res.belief;
    return out;
}

CppResult cpp_ou_step(const GaussianBelief& belief, const CppState& cpp, const UpdateFn& update, const Vec& x,
                      const Vec& y, const GaussianBelief& anchor) {
    if (cpp.grid < 2) {
        throw std::invalid_argument("cpp_ou_step: grid needs at least two points");
    }
    const double lo = CppState::upsilon_min;
    auto objective = [&](double u) { return update(ou_blend(u, belief, anchor), x, y).loglik; };

    // Grid from υ = 1 downward; strict improvement keeps ties at the larger υ.
    const double step = (1.0 - lo) / (cpp.grid - 1);
    int best = cpp.grid - 1;
    double best_val = objective(1.0);
    for (int i = cpp.grid - 2; i >= 0; --i) {
        const double v = objective(lo + step * i);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double u_best = lo + step * best;
    if (best == cpp.grid - 1) u_best = 1.0;

    double a = lo + step * std::max(best - 1, 0);
    double b = best + 1 >= cpp.grid ? 1.0 : lo + step * (best + 1);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    for (int it = 0; it < cpp.refine_iterations; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = objective(d);
        }
    }
    const double u_ref = fc > fd ? c : d;
    const double f_ref = std::max(fc, fd);
    if (f_ref > best_val) {
        u_best = u_ref;
        best_val = f_ref;
    }

    CppResult out;
    out.state = cpp;
    out.state.upsilon = std::clamp(u_best, lo, 1.0);
    const UpdateResult res = update(ou_blend(out.state.upsilon, belief, anchor), x, y);
    out.belief = res.belief;
    out.loglik = res.loglik;
    return out;
}

Vec bone_predict(const HypothesisBank& bank, const MeasurementModel& model, const Vec& x) {
    const std::vector<double> w = bank.weights();
    Vec out = Vec::Zero(model.obs_dim);
    for (std::size_t i = 0; i < bank.hyps.size(); ++i) {
        out += w[i] * model.mean(bank.hyps[i].belief.mean, x);
    }
    return out;
}

Vec bone_predict(const GaussianBelief& belief, const MeasurementModel& model, const Vec& x) {
    return model.mean(belief.mean, x);
}

UpdateResult single_state_step(const ConditionalPrior& prior, const GaussianBelief& belief, const UpdateFn& update,
                               const Vec& x, const Vec& y) {
    return update(apply_conditional_prior(prior, belief), x, y);
}

}  // namespace rbe
