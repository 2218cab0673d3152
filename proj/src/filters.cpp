#include "rbe/filters.hpp"

#include <cmath>
#include <numbers>

namespace rbe {

GaussianBelief kf_predict(const GaussianBelief& belief, const TransitionModel& trans) {
    if (trans.dim() != belief.dim()) {
        throw DimensionError("kf_predict: transition dimension mismatch");
    }
    if (trans.identity) {
        return GaussianBelief(belief.mean, belief.cov + trans.Q);
    }
    return GaussianBelief(trans.F * belief.mean + trans.b, trans.F * belief.cov * trans.F.transpose() + trans.Q);
}

namespace {

UpdateResult gain_update(const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& yhat, const Vec& y) {
    const Eigen::Index d = belief.dim();
    const Eigen::Index o = y.size();
    if (H.rows() != o || H.cols() != d || R.rows() != o || R.cols() != o || yhat.size() != o) {
        throw DimensionError("kf_update: dimension mismatch");
    }
    const Mat sh = belief.cov * H.transpose();
    const Mat s = symmetrize(H * sh + R);
    auto llt = robust_cholesky(s, "innovation covariance");
    const Vec e = y - yhat;
    const Mat k = llt.solve(sh.transpose()).transpose();
    // Joseph form (I − KH)Σ(I − KH)ᵀ + KRKᵀ expanded to avoid D × D products.
    const Mat ksh = k * sh.transpose();
    UpdateResult out;
    out.belief = GaussianBelief(belief.mean + k * e, belief.cov - ksh - ksh.transpose() + k * s * k.transpose());
    const Mat& l = llt.matrixLLT();
    const Vec z = llt.matrixL().solve(e);
    out.loglik = -0.5 * (static_cast<double>(o) * std::log(2.0 * std::numbers::pi) +
                         2.0 * l.diagonal().array().log().sum() + z.squaredNorm());
    return out;
}

}  // namespace

UpdateResult kf_update(const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& y) {
    if (H.cols() != belief.dim()) {
        throw DimensionError("kf_update: H has the wrong number of columns");
    }
    return gain_update(belief, H, R, H * belief.mean, y);
}

UpdateResult kf_update_linearized(const GaussianBelief& belief, const Linearization& lin, const Vec& y) {
    return gain_update(belief, lin.H, lin.Rbar, lin.yhat, y);
}

PrecisionBelief kf_update_precision(const PrecisionBelief& belief, const Mat& H, const Mat& R, const Vec& y) {
    if (H.cols() != belief.dim() || H.rows() != y.size() || R.rows() != y.size() || R.cols() != y.size()) {
        throw DimensionError("kf_update_precision: dimension mismatch");
    }
    auto lr = robust_cholesky(R, "measurement covariance");
    const Mat rih = lr.solve(H);  // R⁻¹H
    const Mat prec = symmetrize(belief.precision + H.transpose() * rih);
    auto lp = robust_cholesky(prec, "posterior precision");
    const Vec e = y - H * belief.mean;
    const Vec mean = belief.mean + lp.solve(rih.transpose() * e);
    return PrecisionBelief(mean, prec);
}

GaussianBelief recursive_linreg_step(const GaussianBelief& belief, const Vec& x, double r, const Vec& y) {
    if (x.size() != belief.dim() || y.size() != 1) {
        throw DimensionError("recursive_linreg_step: dimension mismatch");
    }
    return kf_update(belief, x.transpose(), Mat::Constant(1, 1, r), y).belief;
}

UpdateResult ekf_update(const GaussianBelief& belief, const MeasurementModel& model, const Vec& x, const Vec& y) {
    return kf_update_linearized(belief, linearize(model, belief.mean, x), y);
}

UpdateResult ekf_step(const GaussianBelief& belief, const TransitionModel& trans, const MeasurementModel& model,
                      const Vec& x, const Vec& y) {
    return ekf_update(kf_predict(belief, trans), model, x, y);
}

// -- EnKF --------------------------------------------------------------------

Ensemble::Ensemble(Mat m) : members(std::move(m)) {
    if (members.rows() < 2) {
        throw std::invalid_argument("Ensemble needs at least two members");
    }
    if (!members.allFinite()) {
        throw NumericalError("Ensemble has non-finite members");
    }
}

Vec Ensemble::mean() const { return members.colwise().mean().transpose(); }

Mat Ensemble::cov() const {
    const Mat c = members.rowwise() - members.colwise().mean();
    return symmetrize(c.transpose() * c / static_cast<double>(members.rows()));
}

Ensemble make_ensemble(const GaussianBelief& belief, Eigen::Index s, Rng& rng) {
    return Ensemble(sample(belief, rng, s));
}

Ensemble enkf_step(const Ensemble& ens, const TransitionModel& trans, const MeasurementModel& model, const Vec& x,
                   const Vec& y, Rng& rng) {
    if (model.family != Family::gaussian) {
        throw std::invalid_argument("enkf_step: gaussian measurement model required");
    }
    const Eigen::Index s = ens.size();
    const Eigen::Index d = ens.members.cols();
    const Eigen::Index o = y.size();
    if (trans.dim() != d) {
        throw DimensionError("enkf_step: transition dimension mismatch");
    }

    Mat pred = ens.members;
    if (!trans.identity) {
        pred = (pred * trans.F.transpose()).rowwise() + trans.b.transpose();
    }
    pred += sample(GaussianBelief(Vec::Zero(d), trans.Q), rng, s);

    Mat yhat(s, o);
    for (Eigen::Index i = 0; i < s; ++i) {
        yhat.row(i) = model.mean(pred.row(i).transpose(), x).transpose();
    }
    yhat += sample(GaussianBelief(Vec::Zero(o), model.R), rng, s);

    const Mat dt = pred.rowwise() - pred.colwise().mean();
    const Mat dy = yhat.rowwise() - yhat.colwise().mean();
    const double inv_s = 1.0 / static_cast<double>(s);
    const Mat c = dt.transpose() * dy * inv_s;  // D × o
    const Mat v = symmetrize(dy.transpose() * dy * inv_s);
    auto llt = robust_cholesky(v, "ensemble innovation covariance");
    const Mat k = llt.solve(c.transpose()).transpose();  // D × o

    const Mat innov = (-yhat).rowwise() + y.transpose();  // S × o
    return Ensemble(pred + innov * k.transpose());
}

// -- R-VGA -------------------------------------------------------------------

GaussianBelief rvga_step(const GaussianBelief& belief, const MeasurementModel& model, const Vec& x, const Vec& y,
                         const RvgaConfig& cfg, Rng& rng) {
    if (cfg.inner_iterations < 1) {
        throw std::invalid_argument("rvga_step: I must be at least 1");
    }
    if (!cfg.exact && cfg.samples < 1) {
        throw std::invalid_argument("rvga_step: S must be at least 1");
    }
    const Eigen::Index d = belief.dim();
    const Mat prec0 = inverse_spd(belief.cov);
    GaussianBelief q = belief;

    for (int it = 0; it < cfg.inner_iterations; ++it) {
        Vec mean;
        Mat prec;
        if (cfg.exact) {
            // h(θ) ≈ ŷ + H(θ − μ_i); the implicit mean equation becomes linear in μ.
            const Linearization lin = linearize(model, q.mean, x);
            auto lr = robust_cholesky(lin.Rbar, "R-VGA observation covariance");
            const Mat rih = lr.solve(lin.H);
            const Mat info = lin.H.transpose() * rih;
            prec = symmetrize(prec0 + info);
            const Vec rhs_obs = rih.transpose() * (y - lin.yhat + lin.H * q.mean);
            const Mat a = Mat::Identity(d, d) + belief.cov * info;
            mean = a.partialPivLu().solve(belief.mean + belief.cov * rhs_obs);
        } else {
            const Mat draws = sample(q, rng, cfg.samples);
            Vec g = Vec::Zero(d);
            Mat h = Mat::Zero(d, d);
            for (Eigen::Index s = 0; s < draws.rows(); ++s) {
                const Vec th = draws.row(s).transpose();
                g += log_lik_gradient(model, th, x, y);
                h += log_lik_hessian(model, th, x);
            }
            g /= static_cast<double>(draws.rows());
            h /= static_cast<double>(draws.rows());
            mean = belief.mean + belief.cov * g;
            prec = symmetrize(prec0 - h);
        }
        q = GaussianBelief(mean, inverse_spd(prec));
    }
    return q;
}

}  // namespace rbe
