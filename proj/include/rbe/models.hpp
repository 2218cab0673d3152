/**
 * @file models.hpp
 * @brief Transition and measurement models, a small MLP, and an Adam trainer.
 */
#pragma once

#include <functional>
#include <vector>

#include "rbe/gauss.hpp"

namespace rbe {

/**
 * @brief θ_t = Fθ_{t-1} + b + u_t with u_t ~ N(0, Q).
 */
struct TransitionModel {
    bool identity = true;
    Mat F;
    Vec b;
    Mat Q;

    /// F = I, b = 0, Q = q·I.
    static TransitionModel random_walk(Eigen::Index dim, double q);
    /// F = I, b = 0, arbitrary Q.
    static TransitionModel random_walk(Mat Q);
    static TransitionModel linear(Mat F, Vec b, Mat Q);

    Eigen::Index dim() const { return Q.rows(); }
};

enum class Family { gaussian, bernoulli, categorical };

using MeanFn = std::function<Vec(const Vec& theta, const Vec& x)>;
using JacobianFn = std::function<Mat(const Vec& theta, const Vec& x)>;

/**
 * @brief Observation family with mean function h(θ, x) and its Jacobian.
 *
 * For bernoulli the mean is the success probability. For categorical the
 * mean is the class-probability vector and y is one-hot. R is used only by
 * the gaussian family.
 */
struct MeasurementModel {
    Family family = Family::gaussian;
    Eigen::Index obs_dim = 1;
    Mat R;
    MeanFn mean_fn;
    JacobianFn jacobian_fn;

    Vec mean(const Vec& theta, const Vec& x) const { return mean_fn(theta, x); }
    Mat jacobian(const Vec& theta, const Vec& x) const { return jacobian_fn(theta, x); }

    /// h(θ, x) = Hθ, x ignored.
    static MeasurementModel linear(Mat H, Mat R);
    /// h(θ, x) = xᵀθ with scalar noise variance r.
    static MeasurementModel linear_regression(double r);
    /// Bernoulli with mean σ(xᵀθ).
    static MeasurementModel logistic();
    /// Categorical with mean softmax(Θx); θ stacks the rows of the C×M matrix Θ.
    static MeasurementModel softmax(int classes, Eigen::Index input_dim);
};

/// Moment-matched observation covariance at predicted mean ŷ.
Mat moment_matched_cov(const MeasurementModel& model, const Vec& yhat);

struct Linearization {
    Vec yhat;
    Mat H;
    Mat Rbar;
};

/**
 * @brief ŷ = h(θ̄, x), H = ∇θ h(θ̄, x) and the moment-matched covariance R̄.
 * @throws NumericalError on non-finite outputs.
 */
Linearization linearize(const MeasurementModel& model, const Vec& theta, const Vec& x);

/**
 * @brief Negative log density of y.
 * @throws std::invalid_argument when y is outside the family's support.
 */
double nll(const MeasurementModel& model, const Vec& theta, const Vec& x, const Vec& y);

/// ∇θ log p(y | θ, x) = Hᵀ R̄⁻¹ (y − h). Exact for gaussian and canonical-link families.
Vec log_lik_gradient(const MeasurementModel& model, const Vec& theta, const Vec& x, const Vec& y);

/// −Hᵀ R̄⁻¹ H, the Gauss-Newton/Fisher form of ∇²θ log p.
Mat log_lik_hessian(const MeasurementModel& model, const Vec& theta, const Vec& x);

// -- MLP ---------------------------------------------------------------------

enum class Activation { relu, leaky_relu };

/**
 * @brief Fully connected network. widths = {input, hidden..., output}.
 *
 * Flat parameter packing is layer-major: for each layer the weight matrix
 * (out × in) in row-major order, followed by its bias vector. The last layer
 * is linear.
 */
struct MlpSpec {
    std::vector<int> widths;
    Activation activation = Activation::relu;
    double leak = 0.01;

    Eigen::Index num_params() const;
    /// Number of parameters in the final layer (weights and bias).
    Eigen::Index last_layer_params() const;
    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }
};

Vec mlp_forward(const MlpSpec& spec, const Vec& theta, const Vec& x);
/// Reverse-mode Jacobian of the network output with respect to θ (o × D).
Mat mlp_jacobian(const MlpSpec& spec, const Vec& theta, const Vec& x);
/// Glorot-uniform weights and zero biases.
Vec mlp_init(const MlpSpec& spec, Rng& rng);

/**
 * @brief Measurement model whose mean is the network output.
 *
 * gaussian: h = f(θ, x) with noise R. bernoulli: h = σ(f) with a single
 * output. categorical: h = softmax(f).
 */
MeasurementModel mlp_model(const MlpSpec& spec, Family family, Mat R = Mat());

// -- Adam warm-up ------------------------------------------------------------

struct AdamConfig {
    int epochs = 1;
    int batch_size = 32;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int skip = 0;    ///< first stored epoch n
    int stride = 1;  ///< store every k-th epoch from n
};

struct AdamResult {
    Mat iterates;  ///< Ê × D, rows are θ at the stored epochs
    std::vector<int> stored_epochs;
    Vec theta_final;
    std::vector<double> epoch_loss;  ///< mean training loss after each epoch, index 0 is the initial loss
};

/**
 * @brief Mini-batch Adam on the summed negative log-likelihood.
 *
 * Stores θ after epochs n, n+k, n+2k, ... ≤ E, so Ê = ⌊(E − n)/k⌋ + 1.
 * Epoch 0 denotes the initial parameters.
 * @throws std::invalid_argument for empty data or E < 1.
 */
AdamResult adam_train(const MeasurementModel& model, const Vec& theta0, const Mat& X, const Mat& Y,
                      const AdamConfig& cfg, Rng& rng);

}  // namespace rbe
