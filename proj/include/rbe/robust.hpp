/**
 * @file robust.hpp
 * @brief Weighted-likelihood (WoLF) updates, the 1D WoLF EWMA and posterior influence diagnostics.
 */
#pragma once

#include "rbe/filters.hpp"

namespace rbe {

/**
 * @brief Data-dependent weight W(y, ŷ) applied to the log-likelihood.
 */
struct WeightingFn {
    enum class Kind { constant, imq, md, tmd };
    Kind kind = Kind::constant;
    double c = 1.0;  ///< soft threshold for imq/md/tmd
    double w = 1.0;  ///< value returned by constant

    static WeightingFn constant(double w);
    /// (1 + ‖y − ŷ‖²/c²)^{-1/2}
    static WeightingFn imq(double c);
    /// (1 + ‖R^{-1/2}(y − ŷ)‖²/c²)^{-1/2}
    static WeightingFn md(double c);
    /// 1 if (y − ŷ)ᵀR⁻¹(y − ŷ) ≤ c, else 0.
    static WeightingFn tmd(double c);
};

/// W(y, ŷ); R is used by md and tmd.
double weight(const WeightingFn& fn, const Vec& y, const Vec& yhat, const Mat& R);

/**
 * @brief WoLF update: R⁻¹ is replaced by w²R⁻¹ with w evaluated at ŷ = Hμ.
 *
 * loglik is the unweighted Gaussian predictive log N(y; Hμ, HΣHᵀ + R).
 * A zero weight returns the prior belief.
 */
UpdateResult wolf_update(const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& y,
                         const WeightingFn& fn);

/// wolf_update around a linearization (ŷ, H, R̄).
UpdateResult wolf_update_linearized(const GaussianBelief& belief, const Linearization& lin, const Vec& y,
                                    const WeightingFn& fn);

/// kf_predict, then wolf_update_linearized at μ_{t|t−1}.
UpdateResult wolf_ekf_step(const GaussianBelief& belief, const TransitionModel& trans, const MeasurementModel& model,
                           const Vec& x, const Vec& y, const WeightingFn& fn);

/// State of the 1D WoLF EWMA.
struct EwmaState {
    double m = 0.0;
    double s2 = 1.0;
    double q = 0.01;
    double r = 1.0;
    double c = 0.05;
};

/**
 * @brief One WoLF-EWMA step.
 *
 * w = (1 + (y − m)²/c²)^{-1/2}, r_t² = r²/w², k = (s² + q²)/(s² + q² + r_t²),
 * s² ← k r_t², m ← k y + (1 − k) m.
 */
EwmaState ewma_step(const EwmaState& state, double y);

/// Plain EWMA m ← βy + (1 − β)m.
double plain_ewma_step(double m, double y, double beta);

/**
 * @brief Posterior influence KL(q(·|𝒟ᶜ) ‖ q(·|𝒟)).
 *
 * Both posteriors are obtained from @p belief by wolf_update with @p fn
 * (constant(1) gives the KF), observing y and y_c respectively.
 */
double pif(const WeightingFn& fn, const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& y,
           const Vec& yc);

/// ½[K(y − y_c)]ᵀ Σ_t⁻¹ [K(y − y_c)] for the KF.
double pif_kf_closed_form(const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& y, const Vec& yc);

}  // namespace rbe
