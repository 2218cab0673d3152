// Benchmark CLI: gen, run, sweep and bench subcommands over JSON configs.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rbe/config.hpp"
#include "rbe/experiment.hpp"
#include "rbe/io.hpp"
#include "rbe/learners.hpp"
#include "rbe/scalable.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rbe;

namespace {

struct Options {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    unsigned jobs = 1;
    std::string format = "csv";
};

/// --out, then RBE_OUT_DIR, then the config's output_dir.
fs::path output_dir(const Options& o, const std::string& from_config) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("RBE_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return from_config;
}

ExperimentConfig load_config(const Options& o, bool require_methods) {
    if (o.config.empty()) throw std::invalid_argument("--config is required");
    json j;
    try {
        j = json::parse(read_file(o.config));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg = parse_config(j, require_methods);
    if (o.seed_set) cfg.seeds = {o.seed};
    return cfg;
}

/// Run tasks on a bounded pool. Each task writes only its own slot.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task) {
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) task(i);
        });
    }
    for (auto& t : pool) t.join();
}

std::vector<MethodRun> run_all(const ExperimentConfig& cfg, unsigned jobs) {
    std::vector<std::pair<const MethodSpec*, std::uint64_t>> tasks;
    for (const MethodSpec& m : cfg.methods) {
        for (std::uint64_t s : cfg.seeds) tasks.emplace_back(&m, s);
    }
    std::vector<MethodRun> runs(tasks.size());
    parallel_for(tasks.size(), jobs, [&](std::size_t i) { runs[i] = run_method(cfg, *tasks[i].first, tasks[i].second); });
    return runs;
}

int report_failures(const std::vector<MethodRun>& runs) {
    int failed = 0;
    for (const MethodRun& r : runs) {
        if (r.error.empty()) continue;
        std::cerr << "method " << r.method_id << " seed " << r.seed << " failed: " << r.error << "\n";
        ++failed;
    }
    return failed;
}

/// Rows of scalars as CSV, or as a JSON array of objects.
std::string table(const std::vector<std::string>& header, const std::vector<std::vector<json>>& rows,
                  const std::string& format) {
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json o;
            for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
            arr.push_back(o);
        }
        return arr.dump(2) + "\n";
    }
    auto cell = [](const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_float()) return format_double(v.get<double>());
        if (v.is_null()) return std::string("nan");
        return v.dump();
    };
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + cell(r[i]);
        out += '\n';
    }
    return out;
}

int cmd_gen(const Options& o) {
    const ExperimentConfig cfg = load_config(o, false);
    const fs::path dir = output_dir(o, cfg.output_dir);
    for (std::uint64_t seed : cfg.seeds) {
        const Stream s = make_stream(cfg.generator, cfg.generator_params, seed);
        const fs::path path = dir / ("stream_" + cfg.generator + "_" + std::to_string(seed) + ".csv");
        atomic_write(path, stream_to_csv(s));
        std::cout << path.string() << "\n";
    }
    return 0;
}

int cmd_run(const Options& o) {
    const ExperimentConfig cfg = load_config(o, true);
    const fs::path dir = output_dir(o, cfg.output_dir);
    const std::vector<MethodRun> runs = run_all(cfg, o.jobs);
    if (o.format == "json") {
        const MetricsTable tab = metrics_from_csv(metrics_to_csv(runs));
        std::vector<std::string> header = {"method", "seed", "t"};
        header.insert(header.end(), tab.columns.begin(), tab.columns.end());
        std::vector<std::vector<json>> rows;
        for (std::size_t i = 0; i < tab.rows.size(); ++i) {
            std::vector<json> r = {tab.method[i], tab.seed[i], tab.t[i]};
            for (double v : tab.rows[i]) r.emplace_back(v);
            rows.push_back(std::move(r));
        }
        atomic_write(dir / "metrics.json", table(header, rows, "json"));
    } else {
        atomic_write(dir / "metrics.csv", metrics_to_csv(runs));
    }
    atomic_write(dir / "summary.json", summarize(cfg, runs).dump(2) + "\n");
    std::cout << (dir / "summary.json").string() << "\n";
    return report_failures(runs) == 0 ? 0 : 1;
}

/// Cartesian product of the grid, keys in sorted order, last key fastest.
std::vector<json> grid_points(const json& grid) {
    std::vector<json> points = {json::object()};
    for (const auto& [k, values] : grid.items()) {
        std::vector<json> next;
        for (const json& p : points) {
            for (const json& v : values) {
                json q = p;
                q[k] = v;
                next.push_back(q);
            }
        }
        points = std::move(next);
    }
    return points;
}

int cmd_sweep(const Options& o) {
    const ExperimentConfig base = load_config(o, true);
    if (base.grid.is_null()) throw std::invalid_argument("sweep needs a 'grid' object in the config");
    const fs::path dir = output_dir(o, base.output_dir);
    const std::vector<json> points = grid_points(base.grid);
    std::vector<std::string> keys;
    for (const auto& [k, v] : base.grid.items()) {
        (void)v;
        keys.push_back(k);
    }

    std::vector<ExperimentConfig> cfgs;
    for (const json& p : points) {
        ExperimentConfig c = base;
        for (MethodSpec& m : c.methods) {
            for (const auto& [k, v] : p.items()) m.params[k] = v;
        }
        cfgs.push_back(std::move(c));
    }
    struct Task {
        std::size_t point;
        std::size_t method;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < cfgs.size(); ++p) {
        for (std::size_t m = 0; m < base.methods.size(); ++m) {
            for (std::uint64_t s : base.seeds) tasks.push_back({p, m, s});
        }
    }
    std::vector<MethodRun> runs(tasks.size());
    parallel_for(tasks.size(), o.jobs, [&](std::size_t i) {
        const Task& t = tasks[i];
        runs[i] = run_method(cfgs[t.point], cfgs[t.point].methods[t.method], t.seed);
    });
    const int failed = report_failures(runs);

    std::vector<std::string> metric_names;
    std::vector<std::vector<json>> rows;
    for (std::size_t p = 0; p < cfgs.size(); ++p) {
        std::vector<MethodRun> here;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].point == p) here.push_back(runs[i]);
        }
        const json doc = summarize(cfgs[p], here);
        for (const json& jm : doc["methods"]) {
            if (metric_names.empty()) {
                for (const auto& [k, v] : jm["metrics"].items()) {
                    (void)v;
                    metric_names.push_back(k);
                }
            }
            std::vector<json> r = {jm["id"]};
            for (const std::string& k : keys) r.push_back(points[p][k]);
            for (const std::string& k : metric_names) {
                r.push_back(jm["metrics"].contains(k) ? jm["metrics"][k]["mean"] : json());
            }
            rows.push_back(std::move(r));
        }
    }
    std::vector<std::string> header = {"method"};
    header.insert(header.end(), keys.begin(), keys.end());
    header.insert(header.end(), metric_names.begin(), metric_names.end());
    const fs::path path = dir / (o.format == "json" ? "sweep.json" : "sweep.csv");
    atomic_write(path, table(header, rows, o.format));
    std::cout << path.string() << "\n";
    return failed == 0 ? 0 : 1;
}

/// LoFi update cost as D grows at fixed rank, on a linear-Gaussian regression.
std::vector<std::vector<json>> lofi_scaling(std::uint64_t seed) {
    std::vector<std::vector<json>> rows;
    const int rank = 10;
    const int steps = 200;
    for (int D : {50, 100, 200, 400, 800}) {
        Rng rng = make_rng(seed, "bench_lofi");
        const MeasurementModel model = MeasurementModel::linear_regression(1.0);
        DlrPrecisionBelief b(Vec::Zero(D), Vec::Ones(D), Mat::Zero(D, rank));
        Mat X(steps, D);
        Vec y(steps);
        for (int t = 0; t < steps; ++t) {
            for (int i = 0; i < D; ++i) X(t, i) = standard_normal(rng);
            y(t) = standard_normal(rng);
        }
        const auto t0 = std::chrono::steady_clock::now();
        for (int t = 0; t < steps; ++t) {
            b = lofi_update(lofi_predict(b, 1e-4), model, X.row(t).transpose(), Vec::Constant(1, y(t)));
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back({"lofi_D" + std::to_string(D), seed, steps, sec, 1e6 * sec / steps});
    }
    return rows;
}

int cmd_bench(const Options& o) {
    const std::vector<std::string> header = {"method", "seed", "steps", "seconds", "us_per_step"};
    std::vector<std::vector<json>> rows;
    fs::path dir;
    int failed = 0;
    if (o.config.empty()) {
        dir = output_dir(o, "out");
        rows = lofi_scaling(o.seed);
    } else {
        const ExperimentConfig cfg = load_config(o, true);
        dir = output_dir(o, cfg.output_dir);
        // Timings are taken sequentially so runs do not compete for cores.
        const std::vector<MethodRun> runs = run_all(cfg, 1);
        failed = report_failures(runs);
        for (const MethodRun& r : runs) {
            if (!r.error.empty()) continue;
            const double steps = static_cast<double>(r.rows.size());
            rows.push_back({r.method_id, r.seed, r.rows.size(), r.seconds, steps > 0 ? 1e6 * r.seconds / steps : 0.0});
        }
    }
    const fs::path path = dir / (o.format == "json" ? "bench.json" : "bench.csv");
    atomic_write(path, table(header, rows, o.format));
    std::cout << table(header, rows, "csv");
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recursive Bayesian estimation benchmarks"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", o.config, "JSON experiment config");
        if (config_required) c->required();
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& s) { o.seed = s; o.seed_set = true; }, "run a single seed");
        sub->add_option("--out", o.out, "output directory (overrides RBE_OUT_DIR and output_dir)");
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    };
    CLI::App* gen = app.add_subcommand("gen", "write the stream CSV of each seed");
    CLI::App* run = app.add_subcommand("run", "run every method on every seed");
    CLI::App* sweep = app.add_subcommand("sweep", "run over the cartesian grid of method parameters");
    CLI::App* bench = app.add_subcommand("bench", "time methods; LoFi scaling without a config");
    add_common(gen, true);
    add_common(run, true);
    add_common(sweep, true);
    add_common(bench, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        if (*gen) return cmd_gen(o);
        if (*run) return cmd_run(o);
        if (*sweep) return cmd_sweep(o);
        if (*bench) return cmd_bench(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
