/**
 * @file adaptive.hpp
 * @brief Conditional priors, runlength hypothesis banks and the composed BONE steps.
 *
 * Every method factors into a conditional prior (g, G) followed by a belief
 * update supplied as an UpdateFn, so KF, EKF and WoLF updates compose with
 * every prior.
 */
#pragma once

#include <functional>
#include <vector>

#include "rbe/robust.hpp"

namespace rbe {

/// Belief update from a prior; loglik is the log predictive density of y under the prior.
using UpdateFn = std::function<UpdateResult(const GaussianBelief& prior, const Vec& x, const Vec& y)>;

UpdateFn make_ekf_update(MeasurementModel model);
/// WoLF update; loglik stays the unweighted Gaussian predictive.
UpdateFn make_wolf_update(MeasurementModel model, WeightingFn fn);

struct RunlengthHypothesis {
    int r = 0;
    double log_joint = 0.0;  ///< log p(r_t, 𝒟_{1:t})
    GaussianBelief belief;
};

/**
 * @brief Mean and covariance of p(θ_t | ψ_t, 𝒟_{1:t−1}).
 *
 * static: (μ, Σ). ou(γ): (γμ + (1−γ)μ₀, γ²Σ + (1−γ²)Σ₀). aci(q, λ):
 * (λμ, Σ + qI). cpp_ou uses ou with γ = υ. prior_reset returns the anchor
 * when the context flags a changepoint. mmpr returns the moment-matched
 * mixture of the context bank on a changepoint. oupr uses ou with γ = ν when
 * ν > ε and the anchor otherwise.
 */
struct ConditionalPrior {
    enum class Kind { static_, ou, aci, cpp_ou, prior_reset, mmpr, oupr };
    Kind kind = Kind::static_;
    double gamma = 1.0;
    double q = 0.0;
    double shrink = 1.0;
    double kappa = 0.01;
    double eps = 0.5;
    GaussianBelief anchor;

    static ConditionalPrior static_prior();
    static ConditionalPrior ou(double gamma, GaussianBelief anchor);
    static ConditionalPrior aci(double q, double shrink = 1.0);
    static ConditionalPrior cpp_ou(GaussianBelief anchor);
    static ConditionalPrior prior_reset(GaussianBelief anchor);
    static ConditionalPrior mmpr(GaussianBelief anchor);
    static ConditionalPrior oupr(double kappa, double eps, GaussianBelief anchor);
};

/// Values a conditional prior may depend on.
struct PriorContext {
    double upsilon = 1.0;  ///< cpp_ou
    double nu = 1.0;       ///< oupr
    bool changepoint = false;
    const std::vector<RunlengthHypothesis>* bank = nullptr;  ///< mmpr mixture
    std::vector<double> bank_weights;
};

GaussianBelief apply_conditional_prior(const ConditionalPrior& prior, const GaussianBelief& prev,
                                       const PriorContext& ctx = {});

/**
 * @brief Runlength hypotheses with constant hazard κ, keeping the K most likely.
 *
 * The initial bank holds a single hypothesis r = 0 at the anchor with
 * log_joint = 0. log_joint values are unnormalized; weights() normalizes.
 */
struct HypothesisBank {
    int K = 1;
    double hazard = 0.01;
    std::vector<RunlengthHypothesis> hyps;

    static HypothesisBank initial(const GaussianBelief& anchor, int K, double hazard);

    std::vector<double> weights() const;
    /// Hypothesis with the largest weight (larger r on ties).
    const RunlengthHypothesis& map() const;
};

/// Keep the K largest log_joint values; ties go to the larger runlength.
void prune(HypothesisBank& bank);

/**
 * @brief One RL[K]-PR step.
 *
 * Each hypothesis is extended with the continuation prior (static by
 * default) and log(1−κ) plus its predictive loglik. The changepoint
 * hypothesis r = 0 restarts from the anchor with log κ + logsumexp of the
 * previous joints plus its loglik. The bank is then pruned to K.
 * @throws NumericalError "degenerate bank" when all joints are −∞.
 */
HypothesisBank rl_pr_step(const HypothesisBank& bank, const UpdateFn& update, const Vec& x, const Vec& y,
                          const GaussianBelief& anchor,
                          const ConditionalPrior& continuation = ConditionalPrior::static_prior());

/// As rl_pr_step, but the r = 0 prior is the ν_{t−1}-weighted moment match of the previous hypotheses.
HypothesisBank rl_mmpr_step(const HypothesisBank& bank, const UpdateFn& update, const Vec& x, const Vec& y,
                            const GaussianBelief& anchor,
                            const ConditionalPrior& continuation = ConditionalPrior::static_prior());

/// ν = p(y|r¹)(1−κ) / [p(y|r⁰)κ + p(y|r¹)(1−κ)] from the two log predictives.
double oupr_weight(double loglik_reset, double loglik_continue, double kappa);

/**
 * @brief One RL[1]-OUPR step.
 *
 * If ν > ε the prior is ou(ν) between the previous belief and the anchor and
 * r ← r + 1; otherwise the anchor is used and r ← 0. log_joint is left at 0.
 * @throws NumericalError when both predictives vanish.
 */
RunlengthHypothesis rl1_oupr_step(const RunlengthHypothesis& state, const UpdateFn& update, const Vec& x,
                                  const Vec& y, const GaussianBelief& anchor, double kappa, double eps);

struct CppState {
    double upsilon = 1.0;
    int grid = 20;               ///< grid points on [υ_min, 1]
    int refine_iterations = 30;  ///< golden-section steps around the best grid cell
    static constexpr double upsilon_min = 1e-4;
};

struct CppResult {
    GaussianBelief belief;
    CppState state;
    double loglik = 0.0;
};

/**
 * @brief CPP-OU step: υ* maximizes the predictive of y under ou(υ), then update.
 *
 * Grid search followed by golden-section refinement; ties resolve toward υ = 1.
 */
CppResult cpp_ou_step(const GaussianBelief& belief, const CppState& cpp, const UpdateFn& update, const Vec& x,
                      const Vec& y, const GaussianBelief& anchor);

/// Σ ν h(μ, x) over the bank.
Vec bone_predict(const HypothesisBank& bank, const MeasurementModel& model, const Vec& x);
/// h(μ, x).
Vec bone_predict(const GaussianBelief& belief, const MeasurementModel& model, const Vec& x);

/// Single-state method: prior from @p prior, then @p update.
UpdateResult single_state_step(const ConditionalPrior& prior, const GaussianBelief& belief, const UpdateFn& update,
                               const Vec& x, const Vec& y);

}  // namespace rbe
