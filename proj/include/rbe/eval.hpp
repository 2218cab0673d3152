/**
 * @file eval.hpp
 * @brief Metrics, the prequential loop and the Thompson-sampling bandit loop.
 */
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rbe/adaptive.hpp"
#include "rbe/datagen.hpp"

namespace rbe {

/// sqrt(median of squared residuals). @throws std::invalid_argument on empty input.
double rmedse(const std::vector<double>& residuals);

/// 1 where the predicted class equals the true class.
std::vector<int> prequential_hits(const std::vector<int>& predicted, const std::vector<int>& truth);
/// Running mean of the hits.
std::vector<double> prequential_accuracy(const std::vector<int>& hits);

/// sqrt(Σ_t (θ_{t,i} − μ_{t,i})²).
double state_rmse(const Mat& estimates, const Mat& truth, Eigen::Index component);

/// Mean of the min(t + 1, L) latest values at each t.
std::vector<double> rolling_mean(const std::vector<double>& values, std::size_t window);

/**
 * @brief A learner used by the prequential loop.
 *
 * predict() must only use data seen by previous update() calls.
 */
class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;
    virtual Vec predict(const Vec& x) const = 0;
    virtual void update(const Vec& x, const Vec& y) = 0;
    /// Current parameter point estimate.
    virtual Vec mean() const = 0;
    /// Runlength of the most likely hypothesis, or −1.
    virtual int runlength() const { return -1; }
};

/// Per-step predictions and state estimates of a prequential run.
struct PrequentialTrace {
    Mat predictions;  ///< T × o, made before seeing y_t
    Mat means;        ///< T × D, after update at t
    std::vector<int> runlengths;
};

/// For each t: predict(x_t), then update(x_t, y_t), starting at @p start.
PrequentialTrace run_prequential(OnlineLearner& learner, const Stream& stream, Eigen::Index start = 0);

// -- Bandits -----------------------------------------------------------------

/// Per-arm reward model for Thompson sampling.
class ArmAgent {
public:
    virtual ~ArmAgent() = default;
    /// Expected reward under one posterior draw.
    virtual double sample_reward(Rng& rng) const = 0;
    virtual void update(double reward) = 0;
    /// Called for every arm at each step before selection.
    virtual void tick() {}
};

using ArmFactory = std::function<std::unique_ptr<ArmAgent>()>;

/// Conjugate Beta-Bernoulli arm.
class BetaArm : public ArmAgent {
public:
    BetaArm(double a = 1.0, double b = 1.0) : a_(a), b_(b) {}
    double sample_reward(Rng& rng) const override;
    void update(double reward) override;

private:
    double a_;
    double b_;
};

/// Arm whose reward model is y = θ + N(0, r) filtered by a BONE method.
class GaussianArm : public ArmAgent {
public:
    enum class Method { c_static, c_aci, rl_pr, rl1_oupr, cpp_ou };

    struct Config {
        Method method = Method::c_static;
        double mean0 = 0.5;
        double var0 = 0.25;
        double r = 0.25;   ///< observation noise variance
        double q = 0.0;    ///< c_aci inflation per tick
        int K = 1;         ///< rl_pr hypotheses
        double hazard = 0.01;
        double eps = 0.5;  ///< rl1_oupr threshold
    };

    explicit GaussianArm(Config cfg);
    double sample_reward(Rng& rng) const override;
    void update(double reward) override;
    void tick() override;

private:
    Config cfg_;
    GaussianBelief anchor_;
    HypothesisBank bank_;
    RunlengthHypothesis single_;
    CppState cpp_;
    UpdateFn update_;
};

struct BanditResult {
    std::vector<int> arms;
    std::vector<double> rewards;
    std::vector<double> regret;  ///< cumulative
};

/**
 * @brief Thompson sampling: draw from every arm, pick the argmax (lowest index on ties), update that arm.
 *
 * Regret accumulates the gap between the best and chosen true means.
 */
BanditResult thompson_bandit_loop(const ArmFactory& factory, const Stream& stream, std::uint64_t seed);

}  // namespace rbe
