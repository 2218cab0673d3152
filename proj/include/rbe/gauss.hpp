/**
 * @file gauss.hpp
 * @brief Gaussian belief algebra shared by every filter.
 *
 * Beliefs are plain values. Every function returning a covariance symmetrizes
 * it, and every factorization goes through the jitter policy of
 * robust_cholesky().
 */
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbe/rng.hpp"

namespace rbe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when operand shapes disagree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a factorization or solve cannot be completed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Mean and covariance of a multivariate Gaussian.
 */
struct GaussianBelief {
    Vec mean;
    Mat cov;

    GaussianBelief() = default;
    GaussianBelief(Vec m, Mat c);

    Eigen::Index dim() const { return mean.size(); }
};

/**
 * @brief Mean and precision (inverse covariance) of a multivariate Gaussian.
 */
struct PrecisionBelief {
    Vec mean;
    Mat precision;

    PrecisionBelief() = default;
    PrecisionBelief(Vec m, Mat p);

    Eigen::Index dim() const { return mean.size(); }
};

/// (A + Aᵀ) / 2.
Mat symmetrize(const Mat& a);

/**
 * @brief Cholesky factorization with a single bounded jitter retry.
 *
 * If the first attempt fails, 1e-9·mean(diag)·I is added and the
 * factorization is retried once. A second failure throws NumericalError
 * whose message contains @p what.
 */
Eigen::LLT<Mat> robust_cholesky(const Mat& a, const std::string& what = "matrix");

/// log|A| of a symmetric positive definite matrix, via Cholesky.
double log_det_spd(const Mat& a);

/// A⁻¹ of a symmetric positive definite matrix, via Cholesky. Result is symmetric.
Mat inverse_spd(const Mat& a);

/// A⁻¹B for symmetric positive definite A, via Cholesky.
Mat solve_spd(const Mat& a, const Mat& b);

PrecisionBelief to_precision(const GaussianBelief& b);
GaussianBelief to_covariance(const PrecisionBelief& b);

/// log N(y; m, S).
double log_normal_pdf(const Vec& y, const Vec& m, const Mat& s);

/**
 * @brief KL(p ‖ q) between two Gaussians of equal dimension.
 *
 * Small negative round-off (≥ −1e-10) is clamped to zero.
 */
double kl_divergence(const GaussianBelief& p, const GaussianBelief& q);

/**
 * @brief Exact posterior p(θ | y) for y = Hθ + b + e, e ~ N(0, R).
 * @throws NumericalError if the innovation covariance HΣHᵀ + R is singular.
 */
GaussianBelief condition_linear_gaussian(const GaussianBelief& prior, const Mat& h, const Vec& b,
                                         const Mat& r, const Vec& y);

/**
 * @brief Draw n i.i.d. samples, one per row.
 *
 * An all-zero covariance is accepted here and yields rows equal to the mean.
 */
Mat sample(const GaussianBelief& belief, Rng& rng, Eigen::Index n);

/// Moment-matched single Gaussian of a weighted mixture. Weights must sum to one.
GaussianBelief moment_match(const std::vector<double>& weights,
                            const std::vector<GaussianBelief>& components);

}  // namespace rbe
