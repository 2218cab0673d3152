/**
 * @file experiment.hpp
 * @brief Per-method, per-seed experiment runs and their aggregation.
 *
 * Each experiment records a fixed set of per-step columns and derives its
 * summary metrics from those columns alone, so a metrics CSV can be replayed
 * into the same summary.
 *
 * | experiment      | per-step columns                                   | summary                                   |
 * |-----------------|----------------------------------------------------|-------------------------------------------|
 * | tracking2d      | yhat_0, yhat_1, err_0..err_3                       | J_0..J_3                                  |
 * | linreg          | yhat, y, err, rolling_rmse, runlength [, clean]    | rmse, mae, rmedse [, rmse_clean]          |
 * | mlp_regression  | as linreg                                          | as linreg                                 |
 * | classification  | p, yhat, y, hit, rolling_acc, runlength            | accuracy, misclassification               |
 * | returns         | y, m, dm, outlier                                  | max_abs_dm, max_abs_dm_outlier, max_rel_dm_outlier |
 * | bandit          | arm, reward, regret                                | final_regret                              |
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "rbe/config.hpp"

namespace rbe {

struct MethodRun {
    std::string method_id;
    std::uint64_t seed = 0;
    std::vector<std::string> columns;        ///< per-step columns after method, seed, t
    std::vector<long> t;                     ///< stream index of each row
    std::vector<std::vector<double>> rows;  ///< one entry per column in each row
    std::map<std::string, double> summary;
    std::string error;  ///< nonempty if the run failed
    double seconds = 0.0;
};

/// Rolling window lengths of the regression and classification columns.
inline constexpr std::size_t kRegressionWindow = 10;
inline constexpr std::size_t kAccuracyWindow = 50;

/**
 * @brief Run one method on the stream of one seed.
 *
 * The first config.warmup steps are warm-up data for subspace methods and
 * are not scored. Exceptions are caught and reported in MethodRun::error.
 */
MethodRun run_method(const ExperimentConfig& config, const MethodSpec& method, std::uint64_t seed);

/// Summary metrics recomputed from recorded columns.
std::map<std::string, double> summarize_rows(const std::string& experiment, const std::vector<std::string>& columns,
                                             const std::vector<std::vector<double>>& rows);

/// Linear-interpolation quantile of a nonempty sample, q ∈ [0, 1].
double quantile(std::vector<double> values, double q);

/**
 * @brief summary.json document: {experiment, generator, config, methods: [{id, name, params,
 * seeds, failed, metrics: {name: {mean, median, iqr, per_seed}}}]}.
 *
 * @p runs may be in any order; methods follow config order and seeds follow
 * config order within each method.
 */
nlohmann::json summarize(const ExperimentConfig& config, const std::vector<MethodRun>& runs);

}  // namespace rbe
