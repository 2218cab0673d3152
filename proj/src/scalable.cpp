#include "rbe/scalable.hpp"

#include <algorithm>
#include <utility>

namespace rbe {

SubspaceMap build_subspace(const Mat& iterates, const Vec& theta_final, Eigen::Index d) {
    if (d < 1 || iterates.rows() < d) {
        throw std::invalid_argument("build_subspace: need at least d stored iterates");
    }
    if (theta_final.size() != iterates.cols() || d > iterates.cols()) {
        throw DimensionError("build_subspace: dimension mismatch");
    }
    Eigen::JacobiSVD<Mat> svd(iterates, Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    if (!(s(0) > 0.0) || s(d - 1) < 1e-12 * s(0)) {
        throw NumericalError("rank-deficient iterate matrix");
    }
    SubspaceMap map;
    map.A = svd.matrixV().leftCols(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::Index k;
        map.A.col(j).cwiseAbs().maxCoeff(&k);
        if (map.A(k, j) < 0.0) {
            map.A.col(j) *= -1.0;
        }
    }
    map.offset = theta_final;
    return map;
}

UpdateResult subspace_ekf_step(const GaussianBelief& belief, const SubspaceMap& map, const TransitionModel& trans,
                               const MeasurementModel& model, const Vec& x, const Vec& y) {
    if (belief.dim() != map.dim()) {
        throw DimensionError("subspace_ekf_step: belief and subspace dimensions disagree");
    }
    const GaussianBelief pred = kf_predict(belief, trans);
    Linearization lin = linearize(model, map.embed(pred.mean), x);
    lin.H = lin.H * map.A;
    return kf_update_linearized(pred, lin, y);
}

// -- PULSE -------------------------------------------------------------------

Vec BlockBelief::full_params() const {
    Vec theta(map.full_dim() + last.dim());
    theta << map.embed(hidden.mean), last.mean;
    return theta;
}

BlockBelief pulse_step(const BlockBelief& bb, const MeasurementModel& model, const Vec& x, const Vec& y,
                       PulseTerms* terms) {
    const Eigen::Index dh = bb.hidden.dim();
    const Eigen::Index dl = bb.last.dim();
    const Eigen::Index Dh = bb.map.full_dim();
    if (bb.map.dim() != dh) {
        throw DimensionError("pulse_step: subspace and hidden block dimensions disagree");
    }
    const Linearization lin = linearize(model, bb.full_params(), x);
    if (lin.H.cols() != Dh + dl) {
        throw DimensionError("pulse_step: Jacobian width does not match the block layout");
    }
    const Mat zbar = lin.H.leftCols(Dh) * bb.map.A;
    const Mat wbar = lin.H.rightCols(dl);
    const Vec e = y - lin.yhat;
    const Eigen::Index o = e.size();

    auto lr = robust_cholesky(lin.Rbar, "PULSE observation covariance");
    const Mat riz = lr.solve(zbar);
    const Mat riw = lr.solve(wbar);
    const Mat prec_z = symmetrize(inverse_spd(bb.hidden.cov) + zbar.transpose() * riz);
    const Mat prec_w = symmetrize(inverse_spd(bb.last.cov) + wbar.transpose() * riw);
    const Mat cov_z = inverse_spd(prec_z);
    const Mat cov_w = inverse_spd(prec_w);
    const Mat kz = cov_z * riz.transpose();  // dh × o
    const Mat kw = cov_w * riw.transpose();  // dl × o

    const Mat io = Mat::Identity(o, o);
    const Mat cz = Mat::Identity(dh, dh) - kz * wbar * kw * zbar;
    const Mat cw = Mat::Identity(dl, dl) - kw * zbar * kz * wbar;
    Eigen::FullPivLU<Mat> luz(cz);
    Eigen::FullPivLU<Mat> luw(cw);
    if (!luz.isInvertible() || !luw.isInvertible()) {
        throw NumericalError("PULSE coupling matrix is singular");
    }
    const Vec dz = luz.solve(kz * ((io - wbar * kw) * e));
    const Vec dw = luw.solve(kw * ((io - zbar * kz) * e));

    if (terms != nullptr) {
        *terms = PulseTerms{e, zbar, wbar, lin.Rbar, kz, kw, dz, dw};
    }
    BlockBelief out = bb;
    out.hidden = GaussianBelief(bb.hidden.mean + dz, cov_z);
    out.last = GaussianBelief(bb.last.mean + dw, cov_w);
    return out;
}

// -- LoFi --------------------------------------------------------------------

DlrPrecisionBelief::DlrPrecisionBelief(Vec m, Vec u, Mat w) : mean(std::move(m)), upsilon(std::move(u)), W(std::move(w)) {
    if (upsilon.size() != mean.size() || W.rows() != mean.size()) {
        throw DimensionError("DlrPrecisionBelief: dimension mismatch");
    }
    if (!(upsilon.array() > 0.0).all()) {
        throw NumericalError("DlrPrecisionBelief: diagonal must be positive");
    }
}

Mat DlrPrecisionBelief::precision() const {
    Mat p = W * W.transpose();
    p.diagonal() += upsilon;
    return p;
}

DlrPrecisionBelief lofi_predict(const DlrPrecisionBelief& b, double q) {
    if (!(q >= 0.0)) {
        throw std::invalid_argument("lofi_predict: q must be nonnegative");
    }
    if (q == 0.0) {
        return b;
    }
    const Eigen::ArrayXd u = b.upsilon.array();
    const Eigen::ArrayXd u_pred = u / (1.0 + q * u);
    // Υ⁻¹ − Υ⁻¹Υ_predΥ⁻¹ is diagonal with entries q/(1 + qΥ).
    const Eigen::ArrayXd mid = q / (1.0 + q * u);
    Mat cinv = b.W.transpose() * (mid.matrix().asDiagonal() * b.W);
    cinv.diagonal().array() += 1.0;
    const Mat c = inverse_spd(symmetrize(cinv));
    auto llt = robust_cholesky(c, "LoFi predict C");
    const Mat l = llt.matrixL();
    const Mat w_pred = (u_pred / u).matrix().asDiagonal() * b.W * l;
    return DlrPrecisionBelief(b.mean, u_pred.matrix(), w_pred);
}

LofiUntruncated lofi_update_untruncated(const DlrPrecisionBelief& b, const MeasurementModel& model, const Vec& x,
                                        const Vec& y) {
    const Linearization lin = linearize(model, b.mean, x);
    const Eigen::Index D = b.mean.size();
    const Eigen::Index d = b.rank();
    const Eigen::Index o = y.size();
    auto lr = robust_cholesky(lin.Rbar, "LoFi observation covariance");
    // HᵀR̄^{-1/2} with R̄ = LLᵀ is Hᵀ L⁻ᵀ.
    const Mat ht_rinvhalf = lr.matrixL().solve(lin.H).transpose();  // D × o

    LofiUntruncated out;
    out.upsilon = b.upsilon;
    out.W_tilde.resize(D, d + o);
    out.W_tilde << b.W, ht_rinvhalf;

    const Eigen::ArrayXd uinv = b.upsilon.array().inverse();
    const Mat uw = uinv.matrix().asDiagonal() * out.W_tilde;  // Υ⁻¹W̃
    Mat inner = out.W_tilde.transpose() * uw;
    inner.diagonal().array() += 1.0;
    auto li = robust_cholesky(symmetrize(inner), "LoFi inner matrix");
    const Vec g = lin.H.transpose() * lr.solve(y - lin.yhat);  // HᵀR̄⁻¹(y − ŷ)
    const Vec ug = uinv.matrix().cwiseProduct(g);
    const Vec delta = ug - uw * li.solve(uw.transpose() * g);
    out.mean = b.mean + delta;
    return out;
}

DlrPrecisionBelief lofi_truncate(const LofiUntruncated& u, Eigen::Index d) {
    const Eigen::Index D = u.W_tilde.rows();
    Eigen::JacobiSVD<Mat> svd(u.W_tilde, Eigen::ComputeThinU);
    const Mat& U = svd.matrixU();
    const Vec& s = svd.singularValues();
    const Eigen::Index n = s.size();
    Mat w = Mat::Zero(D, d);
    const Eigen::Index keep = std::min(d, n);
    for (Eigen::Index j = 0; j < keep; ++j) {
        w.col(j) = U.col(j) * s(j);
    }
    Vec ups = u.upsilon;
    for (Eigen::Index j = keep; j < n; ++j) {
        ups.array() += U.col(j).array().square() * s(j) * s(j);
    }
    return DlrPrecisionBelief(u.mean, ups, w);
}

DlrPrecisionBelief lofi_update(const DlrPrecisionBelief& b, const MeasurementModel& model, const Vec& x,
                               const Vec& y) {
    LofiUntruncated u = lofi_update_untruncated(b, model, x, y);
    if (u.W_tilde.rightCols(u.W_tilde.cols() - b.rank()).isZero(0.0)) {
        // Uninformative measurement: keep W rather than a rotation of it.
        return DlrPrecisionBelief(std::move(u.mean), b.upsilon, b.W);
    }
    return lofi_truncate(u, b.rank());
}

}  // namespace rbe
