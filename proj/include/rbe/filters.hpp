/**
 * @file filters.hpp
 * @brief Baseline recursive estimators: KF, recursive linear regression, EKF, EnKF and R-VGA.
 */
#pragma once

#include "rbe/gauss.hpp"
#include "rbe/models.hpp"

namespace rbe {

/// Posterior belief and the log marginal predictive density of y.
struct UpdateResult {
    GaussianBelief belief;
    double loglik = 0.0;
};

/// μ ← Fμ + b, Σ ← FΣFᵀ + Q.
GaussianBelief kf_predict(const GaussianBelief& belief, const TransitionModel& trans);

/**
 * @brief Covariance-form KF update for y = Hθ + e, e ~ N(0, R).
 *
 * loglik is log N(y; Hμ, HΣHᵀ + R).
 * @throws NumericalError on a singular innovation covariance.
 */
UpdateResult kf_update(const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& y);

/// Update around a linearization: predicted mean ŷ replaces Hμ.
UpdateResult kf_update_linearized(const GaussianBelief& belief, const Linearization& lin, const Vec& y);

/// Precision-form update: Σ⁻¹ ← Σ⁻¹ + HᵀR⁻¹H, μ ← μ + Σ_t HᵀR⁻¹(y − Hμ).
PrecisionBelief kf_update_precision(const PrecisionBelief& belief, const Mat& H, const Mat& R, const Vec& y);

/// One step of recursive Bayesian linear regression y = xᵀθ + e, e ~ N(0, r).
GaussianBelief recursive_linreg_step(const GaussianBelief& belief, const Vec& x, double r, const Vec& y);

/// EKF update at the current mean (no predict).
UpdateResult ekf_update(const GaussianBelief& belief, const MeasurementModel& model, const Vec& x, const Vec& y);

/// kf_predict followed by ekf_update linearized at μ_{t|t−1}.
UpdateResult ekf_step(const GaussianBelief& belief, const TransitionModel& trans, const MeasurementModel& model,
                      const Vec& x, const Vec& y);

/// Members stored one per row (S × D), S ≥ 2.
struct Ensemble {
    Mat members;

    Ensemble() = default;
    explicit Ensemble(Mat m);

    Eigen::Index size() const { return members.rows(); }
    Vec mean() const;
    Mat cov() const;
};

/// S draws from a Gaussian belief.
Ensemble make_ensemble(const GaussianBelief& belief, Eigen::Index s, Rng& rng);

/**
 * @brief Perturbed-observation EnKF step.
 *
 * Members are propagated with process noise, predicted observations are
 * perturbed with measurement noise, and the sample gain K̂ = C V⁻¹ is applied.
 * Requires a gaussian measurement model.
 */
Ensemble enkf_step(const Ensemble& ens, const TransitionModel& trans, const MeasurementModel& model, const Vec& x,
                   const Vec& y, Rng& rng);

struct RvgaConfig {
    int inner_iterations = 4;  ///< I ≥ 1
    int samples = 1000;        ///< S ≥ 1, ignored when exact is set
    bool exact = false;        ///< expectations by linearization at the current iterate
};

/**
 * @brief Implicit R-VGA step.
 *
 * Each inner pass sets μ ← μ_{t−1} + Σ_{t−1} E_q[∇ log p] and
 * Σ⁻¹ ← Σ_{t−1}⁻¹ − E_q[∇² log p], with q from the previous pass.
 * Exact mode solves the linearized implicit equations in closed form.
 */
GaussianBelief rvga_step(const GaussianBelief& belief, const MeasurementModel& model, const Vec& x, const Vec& y,
                         const RvgaConfig& cfg, Rng& rng);

}  // namespace rbe
