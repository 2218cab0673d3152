#include "rbe/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace rbe {

namespace {

void require_length(int T) {
    if (T < 0) {
        throw std::invalid_argument("stream length must be nonnegative");
    }
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

int bernoulli(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p ? 1 : 0; }

}  // namespace

Mat tracking2d_F(double dt) {
    Mat f = Mat::Identity(4, 4);
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

Mat tracking2d_H() {
    Mat h = Mat::Zero(2, 4);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return h;
}

Stream gen_tracking2d(const Tracking2dParams& p, std::uint64_t seed) {
    require_length(p.T);
    Rng rng = make_rng(seed, "tracking2d");
    const Mat F = tracking2d_F(p.dt);
    const Mat H = tracking2d_H();
    const double sq = std::sqrt(p.q);
    const double sr = std::sqrt(p.r);
    std::gamma_distribution<double> gam(p.nu / 2.0, 2.0 / p.nu);

    Stream s;
    s.name = "tracking2d";
    s.X = Mat(p.T, 0);
    s.Y.resize(p.T, 2);
    s.theta.resize(p.T, 4);
    s.outlier.assign(static_cast<std::size_t>(p.T), 0);
    Vec th = Vec::Zero(4);
    for (int t = 0; t < p.T; ++t) {
        Vec u(4);
        for (int i = 0; i < 4; ++i) u(i) = sq * standard_normal(rng);
        th = F * th + u;
        Vec m = H * th;
        double scale = sr;
        if (p.variant == Tracking2dParams::Variant::student) {
            scale = sr / std::sqrt(gam(rng));
        } else if (bernoulli(rng, p.p_eps) == 1) {
            m *= 2.0;
            s.outlier[static_cast<std::size_t>(t)] = 1;
        }
        for (int i = 0; i < 2; ++i) s.Y(t, i) = m(i) + scale * standard_normal(rng);
        s.theta.row(t) = th.transpose();
    }
    return s;
}

Stream gen_piecewise_linreg(const PiecewiseLinregParams& p, std::uint64_t seed) {
    require_length(p.T);
    Rng rng = make_rng(seed, "piecewise_linreg");
    std::gamma_distribution<double> gam(p.dof / 2.0, 2.0 / p.dof);
    auto draw_theta = [&] {
        Vec th(3);
        for (int i = 0; i < 3; ++i) th(i) = uniform(rng, -3.0, 3.0);
        return th;
    };

    Stream s;
    s.name = "piecewise_linreg";
    s.X.resize(p.T, 3);
    s.Y.resize(p.T, 1);
    s.theta.resize(p.T, 3);
    s.clean.resize(p.T);
    s.changepoint.assign(static_cast<std::size_t>(p.T), 0);
    Vec th = draw_theta();
    for (int t = 0; t < p.T; ++t) {
        if (t > 0 && bernoulli(rng, p.p_eps) == 1) {
            th = draw_theta();
            s.changepoint[static_cast<std::size_t>(t)] = 1;
        }
        const double x = uniform(rng, -2.0, 2.0);
        const Vec phi = (Vec(3) << 1.0, x, x * x).finished();
        double e = standard_normal(rng);
        if (p.noise == PiecewiseLinregParams::Noise::student) {
            e /= std::sqrt(gam(rng));
        }
        s.X.row(t) = phi.transpose();
        s.clean(t) = phi.dot(th);
        s.Y(t, 0) = s.clean(t) + e;
        s.theta.row(t) = th.transpose();
    }
    return s;
}

Stream gen_periodic_drift_clf(int T, std::uint64_t seed) {
    require_length(T);
    Rng rng = make_rng(seed, "periodic_drift_clf");
    Stream s;
    s.name = "periodic_drift_clf";
    s.X.resize(T, 2);
    s.Y.resize(T, 1);
    s.theta.resize(T, 2);
    for (int t = 0; t < T; ++t) {
        const double a = 5.0 * std::numbers::pi / 180.0 * t;
        const Vec th = (Vec(2) << 10.0 * std::sin(a), 10.0 * std::cos(a)).finished();
        const Vec x = (Vec(2) << uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0)).finished();
        s.X.row(t) = x.transpose();
        s.theta.row(t) = th.transpose();
        s.Y(t, 0) = bernoulli(rng, logistic(th.dot(x)));
    }
    return s;
}

Stream gen_drift_jumps_clf(const DriftJumpsParams& p, std::uint64_t seed) {
    require_length(p.T);
    Rng rng = make_rng(seed, "drift_jumps_clf");
    auto draw_theta = [&] { return (Vec(2) << uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)).finished(); };
    Stream s;
    s.name = "drift_jumps_clf";
    s.X.resize(p.T, 2);
    s.Y.resize(p.T, 1);
    s.theta.resize(p.T, 2);
    s.changepoint.assign(static_cast<std::size_t>(p.T), 0);
    Vec th = draw_theta();
    for (int t = 0; t < p.T; ++t) {
        if (t > 0) {
            if (bernoulli(rng, p.p_eps) == 1) {
                th = draw_theta();
                s.changepoint[static_cast<std::size_t>(t)] = 1;
            } else {
                for (int i = 0; i < 2; ++i) th(i) += p.noise_sd * standard_normal(rng);
            }
        }
        const Vec x = (Vec(2) << uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0)).finished();
        s.X.row(t) = x.transpose();
        s.theta.row(t) = th.transpose();
        s.Y(t, 0) = bernoulli(rng, logistic(th.dot(x)));
    }
    return s;
}

Stream gen_bernoulli_bandit(const BanditParams& p, std::uint64_t seed) {
    require_length(p.T);
    if (p.arms < 1) {
        throw std::invalid_argument("bandit needs at least one arm");
    }
    Rng rng = make_rng(seed, "bernoulli_bandit");
    Stream s;
    s.name = "bernoulli_bandit";
    s.X = Mat(p.T, 0);
    s.Y.resize(p.T, p.arms);
    s.theta.resize(p.T, p.arms);
    Vec th(p.arms);
    for (int a = 0; a < p.arms; ++a) th(a) = uniform(rng, 0.0, 1.0);
    for (int t = 0; t < p.T; ++t) {
        for (int a = 0; a < p.arms; ++a) {
            th(a) = std::clamp(th(a) + p.drift * standard_normal(rng), 0.0, 1.0);
        }
        for (int a = 0; a < p.arms; ++a) s.Y(t, a) = bernoulli(rng, th(a));
        s.theta.row(t) = th.transpose();
    }
    return s;
}

double sinusoidal_clean(double x) {
    constexpr double t1 = 0.2, t2 = -10.0, t3 = 1.0, t4 = 1.0;
    return t1 * x - t2 * std::cos(t3 * std::numbers::pi * x) + t4 * x * x * x;
}

Stream gen_sinusoidal_regression(const SinusoidalParams& p, std::uint64_t seed) {
    require_length(p.T);
    Rng rng = make_rng(seed, "sinusoidal_regression");
    std::vector<double> xs(static_cast<std::size_t>(p.T));
    for (double& x : xs) x = uniform(rng, -3.0, 3.0);
    if (p.sorted) std::sort(xs.begin(), xs.end());
    const double sd = std::sqrt(3.0);

    Stream s;
    s.name = "sinusoidal_regression";
    s.X.resize(p.T, 1);
    s.Y.resize(p.T, 1);
    s.clean.resize(p.T);
    s.outlier.assign(static_cast<std::size_t>(p.T), 0);
    for (int t = 0; t < p.T; ++t) {
        const double x = xs[static_cast<std::size_t>(t)];
        s.X(t, 0) = x;
        s.clean(t) = sinusoidal_clean(x);
        if (bernoulli(rng, p.p_eps) == 1) {
            s.Y(t, 0) = uniform(rng, -40.0, 40.0);
            s.outlier[static_cast<std::size_t>(t)] = 1;
        } else {
            s.Y(t, 0) = s.clean(t) + sd * standard_normal(rng);
        }
    }
    return s;
}

Stream gen_moons(int T, double noise, std::uint64_t seed) {
    require_length(T);
    Rng rng = make_rng(seed, "moons");
    std::vector<int> labels(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) labels[static_cast<std::size_t>(t)] = t < (T + 1) / 2 ? 0 : 1;
    std::shuffle(labels.begin(), labels.end(), rng);

    Stream s;
    s.name = "moons";
    s.X.resize(T, 2);
    s.Y.resize(T, 1);
    for (int t = 0; t < T; ++t) {
        const int c = labels[static_cast<std::size_t>(t)];
        const double a = uniform(rng, 0.0, std::numbers::pi);
        double x0 = std::cos(a);
        double x1 = std::sin(a);
        if (c == 1) {
            x0 = 1.0 - x0;
            x1 = 0.5 - x1;
        }
        s.X(t, 0) = x0 + noise * standard_normal(rng);
        s.X(t, 1) = x1 + noise * standard_normal(rng);
        s.Y(t, 0) = c;
    }
    return s;
}

Stream gen_dependent_segments(const DependentSegmentsParams& p, std::uint64_t seed) {
    require_length(p.T);
    Rng rng = make_rng(seed, "dependent_segments");
    Stream s;
    s.name = "dependent_segments";
    s.X.resize(p.T, 1);
    s.Y.resize(p.T, 1);
    s.theta.resize(p.T, 3);
    s.clean.resize(p.T);
    s.segment_start.resize(p.T);
    s.changepoint.assign(static_cast<std::size_t>(p.T), 0);

    auto curve = [](const Vec& th, double delta) { return th(0) + th(1) * delta + th(2) * delta * delta; };
    Vec th(3);
    th << uniform(rng, -1.0, 1.0), uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0);
    double start = 0.0;
    for (int t = 0; t < p.T; ++t) {
        const double x = p.dx * t;
        if (t > 0 && bernoulli(rng, p.kappa) == 1) {
            const double left = curve(th, x - start);
            th << left, uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0);
            start = x;
            s.changepoint[static_cast<std::size_t>(t)] = 1;
        }
        s.X(t, 0) = x;
        s.segment_start(t) = start;
        s.theta.row(t) = th.transpose();
        s.clean(t) = curve(th, x - start);
        s.Y(t, 0) = s.clean(t) + p.noise * standard_normal(rng);
    }
    return s;
}

Stream gen_dji_like_returns(const ReturnsParams& p, std::uint64_t seed) {
    require_length(p.T);
    if (p.outlier_times.size() != p.outlier_values.size()) {
        throw std::invalid_argument("returns: outlier times and values differ in length");
    }
    Rng rng = make_rng(seed, "dji_like_returns");
    Stream s;
    s.name = "dji_like_returns";
    s.X = Mat(p.T, 0);
    s.Y.resize(p.T, 1);
    s.outlier.assign(static_cast<std::size_t>(p.T), 0);
    for (int t = 0; t < p.T; ++t) s.Y(t, 0) = p.sigma * standard_normal(rng);
    for (std::size_t i = 0; i < p.outlier_times.size(); ++i) {
        const int t = p.outlier_times[i];
        if (t < 0 || t >= p.T) {
            throw std::invalid_argument("returns: outlier time out of range");
        }
        s.Y(t, 0) = p.outlier_values[i];
        s.outlier[static_cast<std::size_t>(t)] = 1;
    }
    return s;
}

}  // namespace rbe
