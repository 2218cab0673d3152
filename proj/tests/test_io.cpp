#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>

#include "rbe/io.hpp"
#include "test_util.hpp"

using namespace rbe;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rbe_test_io_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("doubles round trip exactly") {
    Rng rng = make_rng(1, "io");
    for (int i = 0; i < 1000; ++i) {
        const double v = standard_normal(rng) * std::pow(10.0, uniform(rng, -300.0, 300.0));
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(std::isnan(parse_double("nan")));
    CHECK(parse_double("-inf") == -INFINITY);
    CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("csv line splitting keeps empty fields") {
    CHECK(split_csv_line("a,,b") == std::vector<std::string>{"a", "", "b"});
    CHECK(split_csv_line("x") == std::vector<std::string>{"x"});
}

TEST_CASE("empty stream writes a header only") {
    Stream s;
    s.X = Mat(0, 2);
    s.Y = Mat(0, 1);
    const std::string csv = stream_to_csv(s);
    CHECK(csv == "t,x_0,x_1,y_0\n");
    const Stream back = stream_from_csv(csv);
    CHECK(back.size() == 0);
    CHECK(back.X.cols() == 2);
}

TEST_CASE("stream csv round trip") {
    const Stream s = gen_dependent_segments({.T = 300, .kappa = 0.05}, 4);
    const Stream b = stream_from_csv(stream_to_csv(s));
    CHECK((b.X.array() == s.X.array()).all());
    CHECK((b.Y.array() == s.Y.array()).all());
    CHECK((b.theta.array() == s.theta.array()).all());
    CHECK(b.changepoint == s.changepoint);

    Tracking2dParams p;
    p.T = 50;
    const Stream tr = gen_tracking2d(p, 2);
    const Stream tb = stream_from_csv(stream_to_csv(tr));
    CHECK(tb.X.cols() == 0);
    CHECK((tb.Y.array() == tr.Y.array()).all());
    CHECK((tb.theta.array() == tr.theta.array()).all());

    CHECK_THROWS_AS(stream_from_csv("t,x_0,y_0\n0,1\n"), std::invalid_argument);
    CHECK_THROWS_AS(stream_from_csv("t,x_0,y_0\n0,a,1\n"), std::invalid_argument);
}

TEST_CASE("atomic write creates directories and replaces files") {
    const fs::path dir = scratch("atomic");
    const fs::path f = dir / "a" / "b.txt";
    atomic_write(f, "first");
    CHECK(read_file(f) == "first");
    atomic_write(f, "second");
    CHECK(read_file(f) == "second");
    for (const auto& e : fs::directory_iterator(f.parent_path())) CHECK(e.path().filename() == "b.txt");
    CHECK_THROWS_AS(read_file(dir / "missing"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("metrics csv round trip") {
    MethodRun a;
    a.method_id = "kf";
    a.seed = 3;
    a.columns = {"yhat", "err"};
    a.t = {0, 1};
    a.rows = {{0.1, -0.2}, {std::numeric_limits<double>::quiet_NaN(), 1e-300}};
    MethodRun b = a;
    b.method_id = "wolf";
    b.seed = 4;
    MethodRun failed;
    failed.method_id = "bad";
    failed.error = "boom";
    const std::string csv = metrics_to_csv({a, failed, b});
    const MetricsTable m = metrics_from_csv(csv);
    CHECK(m.columns == a.columns);
    REQUIRE(m.rows.size() == 4);
    CHECK(m.method == std::vector<std::string>{"kf", "kf", "wolf", "wolf"});
    CHECK(m.seed[2] == 4);
    CHECK(m.t[1] == 1);
    CHECK(m.rows[0][1] == -0.2);
    CHECK(std::isnan(m.rows[1][0]));
    CHECK(m.rows[3][1] == 1e-300);

    b.columns = {"other", "err"};
    CHECK_THROWS(metrics_to_csv({a, b}));
}
