/**
 * @file scalable.hpp
 * @brief Filters for high-dimensional parameters: subspace EKF, PULSE and LoFi.
 */
#pragma once

#include "rbe/filters.hpp"

namespace rbe {

/// θ = A z + θ*, with orthonormal columns in A (D × d).
struct SubspaceMap {
    Mat A;
    Vec offset;

    Vec embed(const Vec& z) const { return A * z + offset; }
    Eigen::Index full_dim() const { return A.rows(); }
    Eigen::Index dim() const { return A.cols(); }
};

/**
 * @brief A from the top d right singular vectors of the (uncentered) iterate matrix, θ* = θ_final.
 *
 * Each column of A is signed so that its largest-magnitude entry is positive.
 * @throws std::invalid_argument when Ê < d.
 * @throws NumericalError "rank-deficient iterate matrix" when σ_d < 1e-12·σ_1.
 */
SubspaceMap build_subspace(const Mat& iterates, const Vec& theta_final, Eigen::Index d);

/**
 * @brief EKF step over z with effective Jacobian H A, where H is evaluated at A μ_pred + θ*.
 */
UpdateResult subspace_ekf_step(const GaussianBelief& belief, const SubspaceMap& map, const TransitionModel& trans,
                               const MeasurementModel& model, const Vec& x, const Vec& y);

/**
 * @brief PULSE belief: a subspace block over the hidden layers and a full block over the last layer.
 *
 * The full parameter vector is (A z + ψ*, w) following the MLP packing, where
 * the last-layer parameters come last.
 */
struct BlockBelief {
    GaussianBelief hidden;  ///< over z
    GaussianBelief last;    ///< over w
    SubspaceMap map;        ///< hidden-slice embedding

    Vec full_params() const;
};

/// Intermediate quantities of a PULSE step, exposed for diagnostics.
struct PulseTerms {
    Vec residual;  ///< e = y − ŷ
    Mat Zbar;      ///< ∂h/∂z
    Mat Wbar;      ///< ∂h/∂w
    Mat Rbar;
    Mat Kz;
    Mat Kw;
    Vec dz;  ///< change of the hidden mean
    Vec dw;  ///< change of the last-layer mean
};

/**
 * @brief Coupled block update.
 *
 * Jacobians are taken at the previous means. Σ_t⁻¹ = Σ⁻¹ + Z̄ᵀR̄⁻¹Z̄ and
 * Γ_t⁻¹ = Γ⁻¹ + W̄ᵀR̄⁻¹W̄; the means move by
 * K̂_z = (I − K_zW̄K_wZ̄)⁻¹K_z(I − W̄K_w) and
 * K̂_w = (I − K_wZ̄K_zW̄)⁻¹K_w(I − Z̄K_z) applied to y − ŷ.
 * @throws NumericalError when a coupling matrix is singular.
 */
BlockBelief pulse_step(const BlockBelief& bb, const MeasurementModel& model, const Vec& x, const Vec& y,
                       PulseTerms* terms = nullptr);

/// Precision Υ + WWᵀ with diagonal Υ > 0 and W of fixed rank d.
struct DlrPrecisionBelief {
    Vec mean;
    Vec upsilon;
    Mat W;

    DlrPrecisionBelief() = default;
    DlrPrecisionBelief(Vec m, Vec u, Mat w);

    Mat precision() const;
    Eigen::Index rank() const { return W.cols(); }
};

/**
 * @brief Predict under θ_t = θ_{t−1} + N(0, qI).
 *
 * Υ_pred = (Υ⁻¹ + qI)⁻¹, C⁻¹ = I + Wᵀ(Υ⁻¹ − Υ⁻¹Υ_predΥ⁻¹)W and
 * W_pred = Υ_predΥ⁻¹W L with LLᵀ = C.
 */
DlrPrecisionBelief lofi_predict(const DlrPrecisionBelief& b, double q);

/// Mean update and the untruncated factor W̃ = [W | HᵀR̄^{-1/2}].
struct LofiUntruncated {
    Vec mean;
    Vec upsilon;
    Mat W_tilde;
};

LofiUntruncated lofi_update_untruncated(const DlrPrecisionBelief& b, const MeasurementModel& model, const Vec& x,
                                        const Vec& y);

/// Keep the top d singular directions of W̃ and move the dropped variance onto Υ.
DlrPrecisionBelief lofi_truncate(const LofiUntruncated& u, Eigen::Index d);

/// lofi_update_untruncated followed by lofi_truncate to the current rank.
DlrPrecisionBelief lofi_update(const DlrPrecisionBelief& b, const MeasurementModel& model, const Vec& x,
                               const Vec& y);

}  // namespace rbe
