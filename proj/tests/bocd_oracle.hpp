// Exhaustive changepoint enumeration for linear-Gaussian regression streams.
#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "rbe/gauss.hpp"

namespace rbe::test {

/// Runlength posterior by enumerating every changepoint pattern c_1..c_T.
/// A pattern has prior ∏ κ^c (1−κ)^(1−c); each segment is conditioned in batch
/// from the anchor and r_T = T − (last t with c_t = 1), or T without changepoints.
inline std::map<int, double> brute_force_runlengths(const GaussianBelief& anchor, const std::vector<Vec>& xs,
                                                    const std::vector<double>& ys, double r, double kappa) {
    const int T = static_cast<int>(ys.size());
    std::map<int, double> post;
    double total = 0.0;
    for (int pattern = 0; pattern < (1 << T); ++pattern) {
        double logp = 0.0;
        int start = 0;  // first index of the current segment
        for (int t = 0; t < T; ++t) {
            const bool c = (pattern >> t) & 1;
            logp += c ? std::log(kappa) : std::log1p(-kappa);
            if (c) start = t;
            // Batch posterior of the anchor given y_start..y_{t-1}.
            const int n = t - start;
            Vec m = anchor.mean;
            Mat S = anchor.cov;
            if (n > 0) {
                Mat H(n, anchor.dim());
                Vec yy(n);
                for (int i = 0; i < n; ++i) {
                    H.row(i) = xs[start + i].transpose();
                    yy(i) = ys[start + i];
                }
                const Mat Sy = H * S * H.transpose() + r * Mat::Identity(n, n);
                const Mat K = S * H.transpose() * Sy.inverse();
                m = m + K * (yy - H * m);
                S = S - K * H * S;
            }
            const double mu = xs[t].dot(m);
            const double var = xs[t].dot(S * xs[t]) + r;
            logp += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (ys[t] - mu) * (ys[t] - mu) / var;
        }
        int last = -1;
        for (int t = 0; t < T; ++t)
            if ((pattern >> t) & 1) last = t;
        const int rl = last < 0 ? T : T - 1 - last;
        post[rl] += std::exp(logp);
        total += std::exp(logp);
    }
    for (auto& [k, v] : post) v /= total;
    return post;
}

}  // namespace rbe::test
