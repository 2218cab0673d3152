#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rbe/datagen.hpp"

using namespace rbe;

namespace {

bool same(const Stream& a, const Stream& b) {
    auto eq = [](const Mat& x, const Mat& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
    };
    return eq(a.X, b.X) && eq(a.Y, b.Y) && eq(a.theta, b.theta) && a.changepoint == b.changepoint &&
           a.outlier == b.outlier && eq(a.clean, b.clean);
}

int count(const std::vector<int>& flags) {
    int n = 0;
    for (int f : flags) n += f;
    return n;
}

}  // namespace

TEST_CASE("every generator is deterministic in its seed") {
    Tracking2dParams tr;
    tr.T = 200;
    tr.variant = Tracking2dParams::Variant::mixture;
    CHECK(same(gen_tracking2d(tr, 3), gen_tracking2d(tr, 3)));
    CHECK(!same(gen_tracking2d(tr, 3), gen_tracking2d(tr, 4)));
    CHECK(same(gen_piecewise_linreg({}, 1), gen_piecewise_linreg({}, 1)));
    CHECK(same(gen_periodic_drift_clf(100, 1), gen_periodic_drift_clf(100, 1)));
    CHECK(same(gen_drift_jumps_clf({}, 1), gen_drift_jumps_clf({}, 1)));
    CHECK(same(gen_bernoulli_bandit({}, 1), gen_bernoulli_bandit({}, 1)));
    CHECK(same(gen_sinusoidal_regression({}, 1), gen_sinusoidal_regression({}, 1)));
    CHECK(same(gen_moons(100, 0.1, 1), gen_moons(100, 0.1, 1)));
    CHECK(same(gen_dependent_segments({}, 1), gen_dependent_segments({}, 1)));
    CHECK(same(gen_dji_like_returns({}, 1), gen_dji_like_returns({}, 1)));
}

TEST_CASE("zero-length streams are valid and negative lengths are not") {
    CHECK(gen_moons(0, 0.1, 0).size() == 0);
    CHECK(gen_periodic_drift_clf(0, 0).size() == 0);
    CHECK_THROWS(gen_moons(-1, 0.1, 0));
}

TEST_CASE("tracking streams") {
    Tracking2dParams p;
    p.variant = Tracking2dParams::Variant::mixture;
    p.p_eps = 0.0;
    p.T = 5000;
    const Stream s = gen_tracking2d(p, 0);
    CHECK(count(s.outlier) == 0);
    CHECK(s.theta.rows() == p.T);
    CHECK(s.theta.cols() == 4);
    // Pure linear-Gaussian: measurement residuals have variance r.
    const Mat resid = s.Y - s.theta * tracking2d_H().transpose();
    const double var = resid.array().square().mean();
    CHECK(var == doctest::Approx(p.r).epsilon(0.05));

    p.p_eps = 0.05;
    p.T = 100000;
    const double frac = count(gen_tracking2d(p, 1).outlier) / static_cast<double>(p.T);
    CHECK(std::abs(frac - 0.05) <= 0.005);

    const Mat F = tracking2d_F(0.1);
    CHECK(F(0, 2) == doctest::Approx(0.1));
    CHECK(F(1, 3) == doctest::Approx(0.1));
    CHECK((F.diagonal().array() == 1.0).all());
}

TEST_CASE("piecewise linear regression segments") {
    PiecewiseLinregParams p;
    p.p_eps = 0.0;
    p.T = 2000;
    CHECK(count(gen_piecewise_linreg(p, 0).changepoint) == 0);

    p.p_eps = 0.05;
    p.T = 10000;
    const Stream s = gen_piecewise_linreg(p, 0);
    const double mean_len = static_cast<double>(p.T) / (count(s.changepoint) + 1);
    CHECK(std::abs(mean_len - 1.0 / p.p_eps) <= 0.1 / p.p_eps);
    CHECK((s.X.col(0).array() == 1.0).all());
    CHECK((s.X.col(1).array().abs() <= 2.0).all());
    for (Eigen::Index t = 0; t < s.size(); ++t) {
        const double x = s.X(t, 1);
        CHECK(s.X(t, 2) == x * x);
        const double phi = s.theta(t, 0) + s.theta(t, 1) * x + s.theta(t, 2) * x * x;
        CHECK(std::abs(s.clean(t) - phi) < 1e-12);
    }
    CHECK((s.theta.array().abs() <= 3.0).all());
}

TEST_CASE("periodic drift parameters") {
    const Stream s = gen_periodic_drift_clf(720, 0);
    CHECK(std::abs(s.theta(0, 0)) < 1e-12);
    CHECK(s.theta(0, 1) == doctest::Approx(10.0));
    CHECK(s.theta(18, 0) == doctest::Approx(10.0));
    CHECK(std::abs(s.theta(18, 1)) < 1e-12);
    const double ones = s.Y.sum() / 720.0;
    CHECK(std::abs(ones - 0.5) <= 0.05);
}

TEST_CASE("drift and jumps") {
    DriftJumpsParams p;
    p.p_eps = 0.0;
    p.noise_sd = 0.0;
    const Stream c = gen_drift_jumps_clf(p, 0);
    for (Eigen::Index t = 1; t < c.size(); ++t) CHECK((c.theta.row(t).array() == c.theta.row(0).array()).all());

    p = DriftJumpsParams{};
    p.T = 10000;
    const int jumps = count(gen_drift_jumps_clf(p, 2).changepoint);
    CHECK(std::abs(jumps - 100) <= 30);
}

TEST_CASE("bernoulli bandit arms") {
    BanditParams p;
    p.drift = 0.0;
    p.T = 100;
    const Stream s = gen_bernoulli_bandit(p, 0);
    for (Eigen::Index t = 1; t < s.size(); ++t) CHECK((s.theta.row(t).array() == s.theta.row(0).array()).all());
    CHECK((s.Y.array() == 0.0 || s.Y.array() == 1.0).all());

    p = BanditParams{};
    p.T = 100000;
    const Stream d = gen_bernoulli_bandit(p, 1);
    CHECK((d.theta.array() >= 0.0).all());
    CHECK((d.theta.array() <= 1.0).all());
    for (int a = 0; a < p.arms; ++a) {
        const double m = d.theta.col(a).mean();
        CHECK(m > 0.3);
        CHECK(m < 0.7);
    }
}

TEST_CASE("sinusoidal regression") {
    SinusoidalParams p;
    p.sorted = true;
    p.T = 5000;
    const Stream s = gen_sinusoidal_regression(p, 0);
    for (Eigen::Index t = 1; t < s.size(); ++t) CHECK(s.X(t, 0) >= s.X(t - 1, 0));
    for (Eigen::Index t = 0; t < s.size(); ++t) {
        const double x = s.X(t, 0);
        const double f = 0.2 * x + 10.0 * std::cos(std::numbers::pi * x) + x * x * x;
        CHECK(std::abs(s.clean(t) - f) <= 1e-12 * std::max(1.0, std::abs(f)));
        CHECK(std::abs(sinusoidal_clean(x) - f) <= 1e-12 * std::max(1.0, std::abs(f)));
    }
    const double frac = count(s.outlier) / static_cast<double>(p.T);
    CHECK(std::abs(frac - 0.05) <= 0.01);
}

TEST_CASE("moons") {
    const Stream s = gen_moons(1000, 0.0, 0);
    CHECK(s.Y.sum() == doctest::Approx(500.0));
    for (Eigen::Index t = 0; t < s.size(); ++t) {
        if (s.Y(t, 0) == 0.0) {
            CHECK(s.X(t, 1) >= -1e-12);
            CHECK(std::abs(s.X.row(t).norm() - 1.0) < 1e-12);
        } else {
            CHECK(s.X(t, 1) <= 0.5 + 1e-12);
            CHECK(std::abs(std::hypot(s.X(t, 0) - 1.0, s.X(t, 1) - 0.5) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("dependent segments are continuous") {
    DependentSegmentsParams p;
    p.kappa = 0.0;
    const Stream one = gen_dependent_segments(p, 0);
    CHECK(count(one.changepoint) == 0);
    for (Eigen::Index t = 0; t < one.size(); ++t) {
        const double x = one.X(t, 0);
        const double f = one.theta(0, 0) + one.theta(0, 1) * x + one.theta(0, 2) * x * x;
        CHECK(std::abs(one.clean(t) - f) < 1e-12);
    }

    p.kappa = 0.02;
    p.T = 20000;
    const Stream s = gen_dependent_segments(p, 1);
    int n = 0;
    for (Eigen::Index t = 1; t < s.size(); ++t) {
        if (!s.changepoint[static_cast<std::size_t>(t)]) continue;
        ++n;
        const double delta = s.X(t, 0) - s.segment_start(t - 1);
        const double left = s.theta(t - 1, 0) + s.theta(t - 1, 1) * delta + s.theta(t - 1, 2) * delta * delta;
        CHECK(std::abs(left - s.theta(t, 0)) <= 1e-9);
        CHECK(s.segment_start(t) == s.X(t, 0));
    }
    CHECK(std::abs(n / static_cast<double>(p.T) - p.kappa) <= 0.2 * p.kappa);
}

TEST_CASE("returns with injected outliers") {
    ReturnsParams p;
    p.T = 20000;
    const Stream plain = gen_dji_like_returns(p, 0);
    CHECK(count(plain.outlier) == 0);
    CHECK(std::abs(plain.Y.mean()) < 5e-4);
    CHECK(std::sqrt(plain.Y.array().square().mean()) == doctest::Approx(0.01).epsilon(0.03));

    p.outlier_times = {5, 17};
    p.outlier_values = {0.5, -0.4};
    const Stream s = gen_dji_like_returns(p, 0);
    CHECK(s.Y(5, 0) == 0.5);
    CHECK(s.Y(17, 0) == -0.4);
    CHECK(s.outlier[5] == 1);
    CHECK(count(s.outlier) == 2);
    p.outlier_times = {p.T};
    p.outlier_values = {1.0};
    CHECK_THROWS(gen_dji_like_returns(p, 0));
}
