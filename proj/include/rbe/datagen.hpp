/**
 * @file datagen.hpp
 * @brief Seeded synthetic data generators.
 *
 * Every generator is a pure function of its parameters and seed. Random
 * draws come from make_rng(seed, "<generator name>").
 */
#pragma once

#include <string>
#include <vector>

#include "rbe/gauss.hpp"

namespace rbe {

/// Time-indexed (x_t, y_t) pairs with optional ground-truth channels.
struct Stream {
    std::string name;
    Mat X;                         ///< T × M
    Mat Y;                         ///< T × o
    Mat theta;                     ///< T × D ground truth, or empty
    std::vector<int> changepoint;  ///< per-step flags, or empty
    std::vector<int> outlier;      ///< per-step flags, or empty
    Vec clean;                     ///< noise-free scalar target, or empty
    Vec segment_start;             ///< x at the start of the true segment, or empty

    Eigen::Index size() const { return Y.rows(); }
    Vec x(Eigen::Index t) const { return X.row(t).transpose(); }
    Vec y(Eigen::Index t) const { return Y.row(t).transpose(); }
};

struct Tracking2dParams {
    enum class Variant { student, mixture };
    Variant variant = Variant::student;
    int T = 1000;
    double dt = 0.1;
    double q = 0.10;
    double r = 10.0;
    double nu = 2.01;
    double p_eps = 0.05;
};

/// Constant-velocity 2D tracking; θ_0 = 0. X is empty (T × 0).
Stream gen_tracking2d(const Tracking2dParams& p, std::uint64_t seed);
/// F and H of the tracking model.
Mat tracking2d_F(double dt);
Mat tracking2d_H();

struct PiecewiseLinregParams {
    enum class Noise { gaussian, student };
    Noise noise = Noise::gaussian;
    double dof = 2.01;
    double p_eps = 0.001;
    int T = 1000;
};

/// y = φ(x)ᵀθ_t + noise with φ(x) = (1, x, x²), x ~ U[−2, 2]; θ jumps to U[−3, 3]³ w.p. p_ε.
Stream gen_piecewise_linreg(const PiecewiseLinregParams& p, std::uint64_t seed);

/// θ_t = (10 sin(5°t), 10 cos(5°t)), x ~ U[−3, 3]², y ~ Bern(σ(θ_tᵀx)).
Stream gen_periodic_drift_clf(int T, std::uint64_t seed);

struct DriftJumpsParams {
    int T = 1000;
    double p_eps = 0.01;
    double noise_sd = 0.01;
};

/// θ_t = θ_{t−1} + N(0, sd²I) or a reset to U[−2, 2]² w.p. p_ε; x ~ U[−3, 3]², y ~ Bern(σ(θᵀx)).
Stream gen_drift_jumps_clf(const DriftJumpsParams& p, std::uint64_t seed);

struct BanditParams {
    int arms = 10;
    int T = 10000;
    double drift = 0.03;
};

/**
 * @brief Bernoulli arms θ_t = clip(θ_{t−1} + drift·Z, 0, 1), θ_0 ~ U[0, 1].
 *
 * theta holds the true success probabilities and Y the reward every arm
 * would pay at each step (T × arms). X is empty.
 */
Stream gen_bernoulli_bandit(const BanditParams& p, std::uint64_t seed);

struct SinusoidalParams {
    bool sorted = false;
    int T = 1500;
    double p_eps = 0.05;
};

/// y = θ₁x − θ₂cos(θ₃πx) + θ₄x³ + V w.p. 1 − p_ε, else U ~ U[−40, 40]; θ* = (0.2, −10, 1, 1), V ~ N(0, 3).
Stream gen_sinusoidal_regression(const SinusoidalParams& p, std::uint64_t seed);
/// The noise-free sinusoidal target.
double sinusoidal_clean(double x);

/// Two interleaving half-circles of radius 1; the second is reflected and shifted by (1, 0.5).
Stream gen_moons(int T, double noise, std::uint64_t seed);

struct DependentSegmentsParams {
    int T = 500;
    double kappa = 0.01;
    double dx = 0.01;     ///< spacing of the sorted inputs
    double noise = 0.05;  ///< observation noise standard deviation
};

/**
 * @brief Piecewise quadratic curve continuous at segment boundaries.
 *
 * Within a segment starting at x_s, f = θᵀ(1, Δ, Δ²) with Δ = x − x_s. A new
 * segment starts w.p. κ with θ₀ set to the left limit of the curve.
 */
Stream gen_dependent_segments(const DependentSegmentsParams& p, std::uint64_t seed);

struct ReturnsParams {
    int T = 1000;
    double sigma = 0.01;
    std::vector<int> outlier_times;
    std::vector<double> outlier_values;  ///< value assigned to y at each outlier time
};

/// i.i.d. N(0, σ²) returns with injected values at the requested indices.
Stream gen_dji_like_returns(const ReturnsParams& p, std::uint64_t seed);

}  // namespace rbe
