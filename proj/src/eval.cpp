#include "rbe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rbe {

double rmedse(const std::vector<double>& residuals) {
    if (residuals.empty()) {
        throw std::invalid_argument("rmedse: empty input");
    }
    std::vector<double> sq(residuals.size());
    std::transform(residuals.begin(), residuals.end(), sq.begin(), [](double r) { return r * r; });
    std::sort(sq.begin(), sq.end());
    const std::size_t n = sq.size();
    const double med = n % 2 == 1 ? sq[n / 2] : 0.5 * (sq[n / 2 - 1] + sq[n / 2]);
    return std::sqrt(med);
}

std::vector<int> prequential_hits(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("prequential_hits: length mismatch");
    }
    std::vector<int> hits(predicted.size());
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i] = predicted[i] == truth[i] ? 1 : 0;
    return hits;
}

std::vector<double> prequential_accuracy(const std::vector<int>& hits) {
    std::vector<double> acc(hits.size());
    double s = 0.0;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        s += hits[i];
        acc[i] = s / static_cast<double>(i + 1);
    }
    return acc;
}

double state_rmse(const Mat& estimates, const Mat& truth, Eigen::Index component) {
    if (estimates.rows() != truth.rows() || component < 0 || component >= estimates.cols() ||
        component >= truth.cols()) {
        throw DimensionError("state_rmse: shape mismatch");
    }
    return std::sqrt((estimates.col(component) - truth.col(component)).squaredNorm());
}

std::vector<double> rolling_mean(const std::vector<double>& values, std::size_t window) {
    if (window == 0) {
        throw std::invalid_argument("rolling_mean: window must be positive");
    }
    std::vector<double> out(values.size());
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        s += values[i];
        if (i >= window) s -= values[i - window];
        out[i] = s / static_cast<double>(std::min(i + 1, window));
    }
    return out;
}

PrequentialTrace run_prequential(OnlineLearner& learner, const Stream& stream, Eigen::Index start) {
    const Eigen::Index T = stream.size();
    const Eigen::Index n = std::max<Eigen::Index>(T - start, 0);
    PrequentialTrace tr;
    tr.predictions.resize(n, stream.Y.cols());
    tr.means.resize(n, learner.mean().size());
    tr.runlengths.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index t = start + i;
        const Vec x = stream.x(t);
        tr.predictions.row(i) = learner.predict(x).transpose();
        learner.update(x, stream.y(t));
        tr.means.row(i) = learner.mean().transpose();
        tr.runlengths[static_cast<std::size_t>(i)] = learner.runlength();
    }
    return tr;
}

// -- Bandits -----------------------------------------------------------------

double BetaArm::sample_reward(Rng& rng) const {
    std::gamma_distribution<double> ga(a_, 1.0);
    std::gamma_distribution<double> gb(b_, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

void BetaArm::update(double reward) {
    a_ += reward;
    b_ += 1.0 - reward;
}

GaussianArm::GaussianArm(Config cfg)
    : cfg_(cfg),
      anchor_(Vec::Constant(1, cfg.mean0), Mat::Constant(1, 1, cfg.var0)),
      bank_(HypothesisBank::initial(anchor_, std::max(cfg.K, 1), cfg.hazard)),
      single_{0, 0.0, anchor_},
      update_(make_ekf_update(MeasurementModel::linear(Mat::Identity(1, 1), Mat::Constant(1, 1, cfg.r)))) {}

double GaussianArm::sample_reward(Rng& rng) const {
    const GaussianBelief* b = &single_.belief;
    if (cfg_.method == Method::rl_pr) {
        const std::vector<double> w = bank_.weights();
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        b = &bank_.hyps[pick(rng)].belief;
    }
    return b->mean(0) + std::sqrt(b->cov(0, 0)) * standard_normal(rng);
}

void GaussianArm::update(double reward) {
    const Vec x = Vec::Zero(0);
    const Vec y = Vec::Constant(1, reward);
    switch (cfg_.method) {
        case Method::c_static:
        case Method::c_aci:
            single_.belief = update_(single_.belief, x, y).belief;
            break;
        case Method::rl_pr:
            bank_ = rl_pr_step(bank_, update_, x, y, anchor_);
            break;
        case Method::rl1_oupr:
            single_ = rl1_oupr_step(single_, update_, x, y, anchor_, cfg_.hazard, cfg_.eps);
            break;
        case Method::cpp_ou: {
            const CppResult res = cpp_ou_step(single_.belief, cpp_, update_, x, y, anchor_);
            single_.belief = res.belief;
            cpp_ = res.state;
            break;
        }
    }
}

void GaussianArm::tick() {
    if (cfg_.method == Method::c_aci) {
        single_.belief = apply_conditional_prior(ConditionalPrior::aci(cfg_.q), single_.belief);
    }
}

BanditResult thompson_bandit_loop(const ArmFactory& factory, const Stream& stream, std::uint64_t seed) {
    const Eigen::Index arms = stream.Y.cols();
    if (arms < 2) {
        throw std::invalid_argument("bandit needs at least two arms");
    }
    if (stream.theta.rows() != stream.size() || stream.theta.cols() != arms) {
        throw DimensionError("bandit stream needs per-arm ground truth");
    }
    std::vector<std::unique_ptr<ArmAgent>> agents;
    for (Eigen::Index a = 0; a < arms; ++a) agents.push_back(factory());
    Rng rng = make_rng(seed, "thompson");

    BanditResult res;
    const Eigen::Index T = stream.size();
    res.arms.reserve(static_cast<std::size_t>(T));
    double regret = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        int best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (Eigen::Index a = 0; a < arms; ++a) {
            agents[static_cast<std::size_t>(a)]->tick();
            const double v = agents[static_cast<std::size_t>(a)]->sample_reward(rng);
            if (v > best_val) {
                best_val = v;
                best = static_cast<int>(a);
            }
        }
        const double reward = stream.Y(t, best);
        agents[static_cast<std::size_t>(best)]->update(reward);
        regret += stream.theta.row(t).maxCoeff() - stream.theta(t, best);
        res.arms.push_back(best);
        res.rewards.push_back(reward);
        res.regret.push_back(regret);
    }
    return res;
}

}  // namespace rbe
