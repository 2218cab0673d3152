#include "rbe/robust.hpp"

#include <cmath>
#include <stdexcept>

namespace rbe {

namespace {

void require_positive_c(double c) {
    if (!(c > 0.0)) {
        throw std::invalid_argument("weighting threshold c must be positive");
    }
}

double squared_mahalanobis(const Vec& e, const Mat& R) {
    auto llt = robust_cholesky(R, "weighting covariance");
    return llt.matrixL().solve(e).squaredNorm();
}

}  // namespace

WeightingFn WeightingFn::constant(double w) {
    if (!(w >= 0.0)) {
        throw std::invalid_argument("constant weight must be nonnegative");
    }
    WeightingFn f;
    f.kind = Kind::constant;
    f.w = w;
    return f;
}

WeightingFn WeightingFn::imq(double c) {
    require_positive_c(c);
    WeightingFn f;
    f.kind = Kind::imq;
    f.c = c;
    return f;
}

WeightingFn WeightingFn::md(double c) {
    require_positive_c(c);
    WeightingFn f;
    f.kind = Kind::md;
    f.c = c;
    return f;
}

WeightingFn WeightingFn::tmd(double c) {
    require_positive_c(c);
    WeightingFn f;
    f.kind = Kind::tmd;
    f.c = c;
    return f;
}

double weight(const WeightingFn& fn, const Vec& y, const Vec& yhat, const Mat& R) {
    if (y.size() != yhat.size()) {
        throw DimensionError("weight: y and ŷ differ in length");
    }
    const Vec e = y - yhat;
    switch (fn.kind) {
        case WeightingFn::Kind::constant:
            return fn.w;
        case WeightingFn::Kind::imq:
            return 1.0 / std::sqrt(1.0 + e.squaredNorm() / (fn.c * fn.c));
        case WeightingFn::Kind::md:
            return 1.0 / std::sqrt(1.0 + squared_mahalanobis(e, R) / (fn.c * fn.c));
        case WeightingFn::Kind::tmd:
            return squared_mahalanobis(e, R) <= fn.c ? 1.0 : 0.0;
    }
    throw std::logic_error("unknown weighting kind");
}

UpdateResult wolf_update_linearized(const GaussianBelief& belief, const Linearization& lin, const Vec& y,
                                    const WeightingFn& fn) {
    const double w = weight(fn, y, lin.yhat, lin.Rbar);
    // The unweighted predictive supplies loglik; the belief uses R/w².
    UpdateResult plain = kf_update_linearized(belief, lin, y);
    if (w == 1.0) {
        return plain;
    }
    if (w == 0.0) {
        return UpdateResult{belief, plain.loglik};
    }
    Linearization scaled = lin;
    scaled.Rbar = lin.Rbar / (w * w);
    UpdateResult out = kf_update_linearized(belief, scaled, y);
    out.loglik = plain.loglik;
    return out;
}

UpdateResult wolf_update(const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& y,
                         const WeightingFn& fn) {
    if (H.cols() != belief.dim()) {
        throw DimensionError("wolf_update: H has the wrong number of columns");
    }
    return wolf_update_linearized(belief, Linearization{H * belief.mean, H, R}, y, fn);
}

UpdateResult wolf_ekf_step(const GaussianBelief& belief, const TransitionModel& trans, const MeasurementModel& model,
                           const Vec& x, const Vec& y, const WeightingFn& fn) {
    const GaussianBelief pred = kf_predict(belief, trans);
    return wolf_update_linearized(pred, linearize(model, pred.mean, x), y, fn);
}

EwmaState ewma_step(const EwmaState& state, double y) {
    EwmaState next = state;
    const double e = y - state.m;
    const double w = 1.0 / std::sqrt(1.0 + e * e / (state.c * state.c));
    const double pred = state.s2 + state.q * state.q;
    double rt2 = state.r * state.r / (w * w);
    double k = 0.0;
    if (std::isfinite(rt2)) {
        k = pred / (pred + rt2);
        next.s2 = k * rt2;
    } else {
        next.s2 = pred;
    }
    next.m = k * y + (1.0 - k) * state.m;
    return next;
}

double plain_ewma_step(double m, double y, double beta) { return beta * y + (1.0 - beta) * m; }

double pif(const WeightingFn& fn, const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& y,
           const Vec& yc) {
    const GaussianBelief clean = wolf_update(belief, H, R, y, fn).belief;
    const GaussianBelief contaminated = wolf_update(belief, H, R, yc, fn).belief;
    return kl_divergence(contaminated, clean);
}

double pif_kf_closed_form(const GaussianBelief& belief, const Mat& H, const Mat& R, const Vec& y, const Vec& yc) {
    const Mat sh = belief.cov * H.transpose();
    const Mat s = symmetrize(H * sh + R);
    const Mat k = solve_spd(s, sh.transpose()).transpose();
    const Mat ikh = Mat::Identity(belief.dim(), belief.dim()) - k * H;
    const Mat post = ikh * belief.cov * ikh.transpose() + k * R * k.transpose();
    const Vec shift = k * (y - yc);
    const Vec scaled = solve_spd(symmetrize(post), shift);
    return 0.5 * shift.dot(scaled);
}

}  // namespace rbe
