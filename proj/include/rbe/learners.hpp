/**
 * @file learners.hpp
 * @brief OnlineLearner adapters for every filter, built by name from JSON hyperparameters.
 */
#pragma once

#include <memory>
#include <string>

#include "json.hpp"

#include "rbe/eval.hpp"
#include "rbe/scalable.hpp"

namespace rbe {

/// What a learner needs besides its own hyperparameters.
struct LearnerContext {
    MeasurementModel model;
    TransitionModel trans;  ///< used by kf, ekf, wolf and enkf
    GaussianBelief anchor;  ///< (μ₀, Σ₀)
    std::uint64_t seed = 0;
    bool has_mlp = false;
    MlpSpec mlp;                    ///< subspace and pulse
    const Stream* warmup = nullptr;  ///< subspace and pulse warm-up data
};

/// Names accepted by make_learner().
const std::vector<std::string>& learner_names();

/**
 * @brief Build a learner by name.
 *
 * Filters: kf, ekf, wolf (weighting, c), enkf (samples), rvga (iterations,
 * samples, exact), lofi (rank, q), subspace_ekf (rank, epochs, lr, batch,
 * skip, stride, prior_var, q), pulse (same keys). BONE: c_static, c_aci (q,
 * shrink), c_ou (gamma), cpp_ou, rl_pr (K, hazard), rl_mmpr (K, hazard),
 * rl1_oupr (hazard, eps). Every BONE learner accepts weighting and c to
 * compose with a WoLF update. Scalar smoothers: ewma (beta, m0), wolf_ewma
 * (m0, s0, q, r, c).
 * @throws std::invalid_argument for unknown names or keys.
 */
std::unique_ptr<OnlineLearner> make_learner(const std::string& name, const nlohmann::json& params,
                                            const LearnerContext& ctx);

/// Parse {"weighting": "none|imq|md|tmd", "c": ...}; "none" gives constant(1).
WeightingFn parse_weighting(const nlohmann::json& params);

}  // namespace rbe
