#include "rbe/gauss.hpp"

#include <cmath>
#include <numbers>

namespace rbe {

namespace {

void require_square(const Mat& a, const char* what) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(what) + " must be square");
    }
}

}  // namespace

GaussianBelief::GaussianBelief(Vec m, Mat c) : mean(std::move(m)), cov(std::move(c)) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw DimensionError("belief mean and covariance dimensions disagree");
    }
    cov = symmetrize(cov);
}

PrecisionBelief::PrecisionBelief(Vec m, Mat p) : mean(std::move(m)), precision(std::move(p)) {
    if (precision.rows() != mean.size() || precision.cols() != mean.size()) {
        throw DimensionError("belief mean and precision dimensions disagree");
    }
    precision = symmetrize(precision);
}

Mat symmetrize(const Mat& a) {
    require_square(a, "symmetrize input");
    return 0.5 * (a + a.transpose());
}

Eigen::LLT<Mat> robust_cholesky(const Mat& a, const std::string& what) {
    require_square(a, what.c_str());
    if (!a.allFinite()) {
        throw NumericalError(what + " has non-finite entries");
    }
    Eigen::LLT<Mat> llt(a);
    if (llt.info() == Eigen::Success) {
        return llt;
    }
    const double n = static_cast<double>(std::max<Eigen::Index>(a.rows(), 1));
    double scale = a.diagonal().sum() / n;
    if (!(scale > 0.0)) {
        scale = 1.0;
    }
    Mat jittered = a;
    jittered.diagonal().array() += 1e-9 * scale;
    llt.compute(jittered);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(what + " is not positive definite");
    }
    return llt;
}

double log_det_spd(const Mat& a) {
    auto llt = robust_cholesky(a, "log-determinant argument");
    const Mat& l = llt.matrixLLT();
    return 2.0 * l.diagonal().array().log().sum();
}

Mat inverse_spd(const Mat& a) {
    auto llt = robust_cholesky(a, "inverse argument");
    return symmetrize(llt.solve(Mat::Identity(a.rows(), a.cols())));
}

Mat solve_spd(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows()) {
        throw DimensionError("solve_spd: row mismatch");
    }
    return robust_cholesky(a, "linear system").solve(b);
}

PrecisionBelief to_precision(const GaussianBelief& b) {
    return PrecisionBelief(b.mean, inverse_spd(b.cov));
}

GaussianBelief to_covariance(const PrecisionBelief& b) {
    return GaussianBelief(b.mean, inverse_spd(b.precision));
}

double log_normal_pdf(const Vec& y, const Vec& m, const Mat& s) {
    if (y.size() != m.size() || s.rows() != y.size() || s.cols() != y.size()) {
        throw DimensionError("log_normal_pdf: dimension mismatch");
    }
    auto llt = robust_cholesky(s, "normal covariance");
    const Vec r = y - m;
    const Vec z = llt.matrixL().solve(r);
    const double logdet = 2.0 * Mat(llt.matrixLLT()).diagonal().array().log().sum();
    const double k = static_cast<double>(y.size());
    return -0.5 * (k * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
}

double kl_divergence(const GaussianBelief& p, const GaussianBelief& q) {
    if (p.dim() != q.dim()) {
        throw DimensionError("kl_divergence: dimension mismatch");
    }
    auto lq = robust_cholesky(q.cov, "KL reference covariance");
    auto lp = robust_cholesky(p.cov, "KL argument covariance");
    const Mat& lqm = lq.matrixLLT();
    const Mat& lpm = lp.matrixLLT();
    const double logdet_q = 2.0 * lqm.diagonal().array().log().sum();
    const double logdet_p = 2.0 * lpm.diagonal().array().log().sum();
    const double trace = lq.solve(p.cov).trace();
    const Vec d = q.mean - p.mean;
    const double maha = d.dot(lq.solve(d));
    const double kl = 0.5 * (trace + maha - static_cast<double>(p.dim()) + logdet_q - logdet_p);
    if (kl < 0.0 && kl >= -1e-10) {
        return 0.0;
    }
    return std::max(kl, 0.0);
}

GaussianBelief condition_linear_gaussian(const GaussianBelief& prior, const Mat& h, const Vec& b,
                                         const Mat& r, const Vec& y) {
    const Eigen::Index d = prior.dim();
    const Eigen::Index o = y.size();
    if (h.rows() != o || h.cols() != d || b.size() != o || r.rows() != o || r.cols() != o) {
        throw DimensionError("condition_linear_gaussian: dimension mismatch");
    }
    const Mat sh = prior.cov * h.transpose();
    const Mat s = symmetrize(h * sh + r);
    auto llt = robust_cholesky(s, "innovation covariance");
    const Mat k = llt.solve(sh.transpose()).transpose();
    const Vec mean = prior.mean + k * (y - h * prior.mean - b);
    const Mat ikh = Mat::Identity(d, d) - k * h;
    const Mat cov = ikh * prior.cov * ikh.transpose() + k * r * k.transpose();
    return GaussianBelief(mean, cov);
}

Mat sample(const GaussianBelief& belief, Rng& rng, Eigen::Index n) {
    const Eigen::Index d = belief.dim();
    Mat out(n, d);
    if (n == 0) {
        return out;
    }
    if (belief.cov.isZero(0.0)) {
        out.rowwise() = belief.mean.transpose();
        return out;
    }
    auto llt = robust_cholesky(belief.cov, "sampling covariance");
    const Mat l = llt.matrixL();
    Mat z(d, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            z(i, j) = standard_normal(rng);
        }
    }
    out = ((l * z).colwise() + belief.mean).transpose();
    return out;
}

GaussianBelief moment_match(const std::vector<double>& weights,
                            const std::vector<GaussianBelief>& components) {
    if (weights.size() != components.size() || components.empty()) {
        throw DimensionError("moment_match: need matching, nonempty weights and components");
    }
    const Eigen::Index d = components.front().dim();
    Vec mean = Vec::Zero(d);
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (components[i].dim() != d) {
            throw DimensionError("moment_match: component dimension mismatch");
        }
        mean += weights[i] * components[i].mean;
    }
    Mat cov = Mat::Zero(d, d);
    for (std::size_t i = 0; i < components.size(); ++i) {
        const Vec dev = components[i].mean - mean;
        cov += weights[i] * (components[i].cov + dev * dev.transpose());
    }
    cov = symmetrize(cov);
    robust_cholesky(cov, "moment-matched covariance");
    return GaussianBelief(mean, cov);
}

}  // namespace rbe
