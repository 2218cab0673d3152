#include "rbe/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rbe {

namespace {

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Vec softmax_vec(const Vec& z) {
    const double m = z.maxCoeff();
    Vec e = (z.array() - m).exp();
    return e / e.sum();
}

bool is_one_hot(const Vec& y) {
    int ones = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) == 1.0) {
            ++ones;
        } else if (y(i) != 0.0) {
            return false;
        }
    }
    return ones == 1;
}

}  // namespace

TransitionModel TransitionModel::random_walk(Eigen::Index dim, double q) {
    return random_walk(Mat(q * Mat::Identity(dim, dim)));
}

TransitionModel TransitionModel::random_walk(Mat Q) {
    TransitionModel t;
    t.identity = true;
    const Eigen::Index d = Q.rows();
    t.F = Mat::Identity(d, d);
    t.b = Vec::Zero(d);
    t.Q = symmetrize(Q);
    return t;
}

TransitionModel TransitionModel::linear(Mat F, Vec b, Mat Q) {
    if (F.rows() != F.cols() || b.size() != F.rows() || Q.rows() != F.rows() || Q.cols() != F.rows()) {
        throw DimensionError("TransitionModel::linear: dimension mismatch");
    }
    TransitionModel t;
    t.identity = false;
    t.F = std::move(F);
    t.b = std::move(b);
    t.Q = symmetrize(Q);
    return t;
}

MeasurementModel MeasurementModel::linear(Mat H, Mat R) {
    if (R.rows() != H.rows() || R.cols() != H.rows()) {
        throw DimensionError("MeasurementModel::linear: R must be o × o");
    }
    MeasurementModel m;
    m.family = Family::gaussian;
    m.obs_dim = H.rows();
    m.R = R;
    m.mean_fn = [H](const Vec& theta, const Vec&) -> Vec { return H * theta; };
    m.jacobian_fn = [H](const Vec&, const Vec&) -> Mat { return H; };
    return m;
}

MeasurementModel MeasurementModel::linear_regression(double r) {
    MeasurementModel m;
    m.family = Family::gaussian;
    m.obs_dim = 1;
    m.R = Mat::Constant(1, 1, r);
    m.mean_fn = [](const Vec& theta, const Vec& x) -> Vec { return Vec::Constant(1, x.dot(theta)); };
    m.jacobian_fn = [](const Vec&, const Vec& x) -> Mat { return x.transpose(); };
    return m;
}

MeasurementModel MeasurementModel::logistic() {
    MeasurementModel m;
    m.family = Family::bernoulli;
    m.obs_dim = 1;
    m.mean_fn = [](const Vec& theta, const Vec& x) -> Vec { return Vec::Constant(1, sigmoid(x.dot(theta))); };
    m.jacobian_fn = [](const Vec& theta, const Vec& x) -> Mat {
        const double p = sigmoid(x.dot(theta));
        return (p * (1.0 - p)) * x.transpose();
    };
    return m;
}

MeasurementModel MeasurementModel::softmax(int classes, Eigen::Index input_dim) {
    MeasurementModel m;
    m.family = Family::categorical;
    m.obs_dim = classes;
    auto logits = [classes, input_dim](const Vec& theta, const Vec& x) -> Vec {
        const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
            theta.data(), classes, input_dim);
        return w * x;
    };
    m.mean_fn = [logits](const Vec& theta, const Vec& x) -> Vec { return softmax_vec(logits(theta, x)); };
    m.jacobian_fn = [logits, classes, input_dim](const Vec& theta, const Vec& x) -> Mat {
        const Vec p = softmax_vec(logits(theta, x));
        const Mat dp = Mat(p.asDiagonal()) - p * p.transpose();
        Mat j(classes, classes * input_dim);
        for (int c = 0; c < classes; ++c) {
            j.middleCols(c * input_dim, input_dim) = dp.col(c) * x.transpose();
        }
        return j;
    };
    return m;
}

Mat moment_matched_cov(const MeasurementModel& model, const Vec& yhat) {
    switch (model.family) {
        case Family::gaussian:
            return model.R;
        case Family::bernoulli: {
            Mat r(1, 1);
            r(0, 0) = yhat(0) * (1.0 - yhat(0));
            return r;
        }
        case Family::categorical: {
            const Eigen::Index c = yhat.size();
            return Mat(yhat.asDiagonal()) - yhat * yhat.transpose() + 1e-6 * Mat::Identity(c, c);
        }
    }
    throw std::logic_error("unknown family");
}

Linearization linearize(const MeasurementModel& model, const Vec& theta, const Vec& x) {
    if (!theta.allFinite()) {
        throw NumericalError("linearize: non-finite parameters");
    }
    Linearization lin;
    lin.yhat = model.mean(theta, x);
    lin.H = model.jacobian(theta, x);
    if (!lin.yhat.allFinite() || !lin.H.allFinite()) {
        throw NumericalError("linearize: non-finite model output");
    }
    if (lin.H.rows() != lin.yhat.size() || lin.H.cols() != theta.size()) {
        throw DimensionError("linearize: Jacobian shape mismatch");
    }
    lin.Rbar = moment_matched_cov(model, lin.yhat);
    return lin;
}

double nll(const MeasurementModel& model, const Vec& theta, const Vec& x, const Vec& y) {
    const Vec mu = model.mean(theta, x);
    if (y.size() != mu.size()) {
        throw DimensionError("nll: observation dimension mismatch");
    }
    switch (model.family) {
        case Family::gaussian:
            return -log_normal_pdf(y, mu, model.R);
        case Family::bernoulli: {
            if (y(0) != 0.0 && y(0) != 1.0) {
                throw std::invalid_argument("nll: bernoulli observation must be 0 or 1");
            }
            const double p = std::clamp(mu(0), 1e-300, 1.0 - 1e-16);
            return y(0) == 1.0 ? -std::log(p) : -std::log1p(-p);
        }
        case Family::categorical: {
            if (!is_one_hot(y)) {
                throw std::invalid_argument("nll: categorical observation must be one-hot");
            }
            Eigen::Index k;
            y.maxCoeff(&k);
            return -std::log(std::max(mu(k), 1e-300));
        }
    }
    throw std::logic_error("unknown family");
}

Vec log_lik_gradient(const MeasurementModel& model, const Vec& theta, const Vec& x, const Vec& y) {
    const Linearization lin = linearize(model, theta, x);
    if (model.family == Family::bernoulli) {
        // Avoid dividing by a vanishing σ(1−σ): H already carries that factor.
        const double v = std::max(lin.Rbar(0, 0), 1e-300);
        return lin.H.transpose() * ((y - lin.yhat) / v);
    }
    return lin.H.transpose() * solve_spd(lin.Rbar, y - lin.yhat);
}

Mat log_lik_hessian(const MeasurementModel& model, const Vec& theta, const Vec& x) {
    const Linearization lin = linearize(model, theta, x);
    if (model.family == Family::bernoulli) {
        const double v = std::max(lin.Rbar(0, 0), 1e-300);
        return -(lin.H.transpose() * lin.H) / v;
    }
    return -symmetrize(lin.H.transpose() * solve_spd(lin.Rbar, lin.H));
}

// -- MLP ---------------------------------------------------------------------

Eigen::Index MlpSpec::num_params() const {
    Eigen::Index n = 0;
    for (std::size_t l = 1; l < widths.size(); ++l) {
        n += static_cast<Eigen::Index>(widths[l - 1]) * widths[l] + widths[l];
    }
    return n;
}

Eigen::Index MlpSpec::last_layer_params() const {
    const std::size_t l = widths.size() - 1;
    return static_cast<Eigen::Index>(widths[l - 1]) * widths[l] + widths[l];
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ForwardTrace {
    std::vector<Vec> pre;   // z_l
    std::vector<Vec> post;  // a_l, post[0] = x
};

void check_spec(const MlpSpec& spec, const Vec& theta, const Vec& x) {
    if (spec.widths.size() < 2) {
        throw std::invalid_argument("MlpSpec needs at least input and output widths");
    }
    if (theta.size() != spec.num_params()) {
        throw DimensionError("MLP parameter vector has the wrong length");
    }
    if (x.size() != spec.input_dim()) {
        throw DimensionError("MLP input has the wrong length");
    }
}

double act(const MlpSpec& s, double z) {
    if (z > 0) return z;
    return s.activation == Activation::relu ? 0.0 : s.leak * z;
}

double act_grad(const MlpSpec& s, double z) {
    if (z > 0) return 1.0;
    return s.activation == Activation::relu ? 0.0 : s.leak;
}

ForwardTrace forward_trace(const MlpSpec& spec, const Vec& theta, const Vec& x) {
    check_spec(spec, theta, x);
    ForwardTrace tr;
    tr.post.push_back(x);
    Eigen::Index off = 0;
    const std::size_t layers = spec.widths.size() - 1;
    for (std::size_t l = 1; l <= layers; ++l) {
        const int in = spec.widths[l - 1];
        const int out = spec.widths[l];
        Eigen::Map<const RowMat> w(theta.data() + off, out, in);
        off += static_cast<Eigen::Index>(in) * out;
        Eigen::Map<const Vec> b(theta.data() + off, out);
        off += out;
        Vec z = w * tr.post.back() + b;
        tr.pre.push_back(z);
        if (l < layers) {
            tr.post.push_back(z.unaryExpr([&](double v) { return act(spec, v); }));
        } else {
            tr.post.push_back(z);
        }
    }
    return tr;
}

}  // namespace

Vec mlp_forward(const MlpSpec& spec, const Vec& theta, const Vec& x) {
    return forward_trace(spec, theta, x).post.back();
}

Mat mlp_jacobian(const MlpSpec& spec, const Vec& theta, const Vec& x) {
    const ForwardTrace tr = forward_trace(spec, theta, x);
    const std::size_t layers = spec.widths.size() - 1;
    const int o = spec.output_dim();
    Mat jac(o, theta.size());

    std::vector<Eigen::Index> offsets(layers + 1, 0);
    for (std::size_t l = 1; l <= layers; ++l) {
        offsets[l] = offsets[l - 1] + static_cast<Eigen::Index>(spec.widths[l - 1]) * spec.widths[l] +
                     spec.widths[l];
    }

    Mat delta = Mat::Identity(o, o);  // ∂output/∂z_l
    for (std::size_t l = layers; l >= 1; --l) {
        const int in = spec.widths[l - 1];
        const int out = spec.widths[l];
        const Eigen::Index woff = offsets[l - 1];
        const Eigen::Index boff = woff + static_cast<Eigen::Index>(in) * out;
        const Vec& a_prev = tr.post[l - 1];
        for (int i = 0; i < out; ++i) {
            jac.middleCols(woff + static_cast<Eigen::Index>(i) * in, in) = delta.col(i) * a_prev.transpose();
        }
        jac.middleCols(boff, out) = delta;
        if (l > 1) {
            Eigen::Map<const RowMat> w(theta.data() + woff, out, in);
            Mat back = delta * w;
            const Vec& z_prev = tr.pre[l - 2];
            for (int j = 0; j < in; ++j) {
                back.col(j) *= act_grad(spec, z_prev(j));
            }
            delta = std::move(back);
        }
    }
    return jac;
}

Vec mlp_init(const MlpSpec& spec, Rng& rng) {
    Vec theta = Vec::Zero(spec.num_params());
    Eigen::Index off = 0;
    for (std::size_t l = 1; l < spec.widths.size(); ++l) {
        const int in = spec.widths[l - 1];
        const int out = spec.widths[l];
        const double lim = std::sqrt(6.0 / (in + out));
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(in) * out; ++k) {
            theta(off + k) = uniform(rng, -lim, lim);
        }
        off += static_cast<Eigen::Index>(in) * out + out;
    }
    return theta;
}

MeasurementModel mlp_model(const MlpSpec& spec, Family family, Mat R) {
    MeasurementModel m;
    m.family = family;
    m.obs_dim = spec.output_dim();
    switch (family) {
        case Family::gaussian:
            if (R.rows() != m.obs_dim || R.cols() != m.obs_dim) {
                throw DimensionError("mlp_model: R must be o × o");
            }
            m.R = R;
            m.mean_fn = [spec](const Vec& t, const Vec& x) -> Vec { return mlp_forward(spec, t, x); };
            m.jacobian_fn = [spec](const Vec& t, const Vec& x) -> Mat { return mlp_jacobian(spec, t, x); };
            break;
        case Family::bernoulli:
            if (m.obs_dim != 1) {
                throw DimensionError("mlp_model: bernoulli needs a single output");
            }
            m.mean_fn = [spec](const Vec& t, const Vec& x) -> Vec {
                return Vec::Constant(1, sigmoid(mlp_forward(spec, t, x)(0)));
            };
            m.jacobian_fn = [spec](const Vec& t, const Vec& x) -> Mat {
                const double p = sigmoid(mlp_forward(spec, t, x)(0));
                return (p * (1.0 - p)) * mlp_jacobian(spec, t, x);
            };
            break;
        case Family::categorical:
            m.mean_fn = [spec](const Vec& t, const Vec& x) -> Vec { return softmax_vec(mlp_forward(spec, t, x)); };
            m.jacobian_fn = [spec](const Vec& t, const Vec& x) -> Mat {
                const Vec p = softmax_vec(mlp_forward(spec, t, x));
                const Mat dp = Mat(p.asDiagonal()) - p * p.transpose();
                return dp * mlp_jacobian(spec, t, x);
            };
            break;
    }
    return m;
}

// -- Adam --------------------------------------------------------------------

AdamResult adam_train(const MeasurementModel& model, const Vec& theta0, const Mat& X, const Mat& Y,
                      const AdamConfig& cfg, Rng& rng) {
    if (X.rows() == 0 || Y.rows() != X.rows()) {
        throw std::invalid_argument("adam_train: empty or mismatched data");
    }
    if (cfg.epochs < 1 || cfg.stride < 1 || cfg.skip < 0 || cfg.skip > cfg.epochs || cfg.batch_size < 1) {
        throw std::invalid_argument("adam_train: invalid epoch/skip/stride/batch configuration");
    }
    const Eigen::Index n = X.rows();
    const Eigen::Index d = theta0.size();

    auto mean_loss = [&](const Vec& th) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            s += nll(model, th, X.row(i).transpose(), Y.row(i).transpose());
        }
        return s / static_cast<double>(n);
    };

    AdamResult res;
    const int count = (cfg.epochs - cfg.skip) / cfg.stride + 1;
    res.iterates.resize(count, d);
    Vec theta = theta0;
    Vec m1 = Vec::Zero(d);
    Vec m2 = Vec::Zero(d);
    long step = 0;
    int row = 0;
    auto maybe_store = [&](int epoch) {
        if (epoch >= cfg.skip && (epoch - cfg.skip) % cfg.stride == 0) {
            res.iterates.row(row++) = theta.transpose();
            res.stored_epochs.push_back(epoch);
        }
    };
    res.epoch_loss.push_back(mean_loss(theta));
    maybe_store(0);

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int e = 1; e <= cfg.epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index stop = std::min<Eigen::Index>(n, start + cfg.batch_size);
            Vec g = Vec::Zero(d);
            for (Eigen::Index k = start; k < stop; ++k) {
                const Eigen::Index i = order[k];
                g -= log_lik_gradient(model, theta, X.row(i).transpose(), Y.row(i).transpose());
            }
            g /= static_cast<double>(stop - start);
            ++step;
            m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
            m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * g.cwiseProduct(g);
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            theta.array() -= cfg.lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.eps);
        }
        res.epoch_loss.push_back(mean_loss(theta));
        maybe_store(e);
    }
    res.theta_final = theta;
    return res;
}

}  // namespace rbe
