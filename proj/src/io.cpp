#include "rbe/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace rbe {

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(line);
        pos = end + 1;
    }
    return out;
}

long parse_long(std::string_view s) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

/// Count consecutive header fields named prefix0, prefix1, ... starting at @p i.
std::size_t count_prefixed(const std::vector<std::string>& h, std::size_t i, const std::string& prefix) {
    std::size_t n = 0;
    while (i + n < h.size() && h[i + n] == prefix + std::to_string(n)) ++n;
    return n;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, p);
}

double parse_double(std::string_view s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = line.find(',', pos);
        if (end == std::string_view::npos) {
            out.emplace_back(line.substr(pos));
            break;
        }
        out.emplace_back(line.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

std::string stream_to_csv(const Stream& s) {
    const Eigen::Index T = s.size();
    const bool theta = s.theta.rows() == T && s.theta.cols() > 0;
    const bool cp = s.changepoint.size() == static_cast<std::size_t>(T) && T > 0;
    std::string out = "t";
    for (Eigen::Index i = 0; i < s.X.cols(); ++i) out += ",x_" + std::to_string(i);
    for (Eigen::Index i = 0; i < s.Y.cols(); ++i) out += ",y_" + std::to_string(i);
    if (theta) {
        for (Eigen::Index i = 0; i < s.theta.cols(); ++i) out += ",theta_" + std::to_string(i);
    }
    if (cp) out += ",changepoint";
    out += '\n';
    for (Eigen::Index t = 0; t < T; ++t) {
        out += std::to_string(t);
        for (Eigen::Index i = 0; i < s.X.cols(); ++i) out += "," + format_double(s.X(t, i));
        for (Eigen::Index i = 0; i < s.Y.cols(); ++i) out += "," + format_double(s.Y(t, i));
        if (theta) {
            for (Eigen::Index i = 0; i < s.theta.cols(); ++i) out += "," + format_double(s.theta(t, i));
        }
        if (cp) out += "," + std::to_string(s.changepoint[static_cast<std::size_t>(t)]);
        out += '\n';
    }
    return out;
}

Stream stream_from_csv(std::string_view csv) {
    const std::vector<std::string_view> lines = lines_of(csv);
    if (lines.empty()) throw std::invalid_argument("stream csv: missing header");
    const std::vector<std::string> h = split_csv_line(lines[0]);
    if (h.empty() || h[0] != "t") throw std::invalid_argument("stream csv: first column must be t");
    std::size_t i = 1;
    const std::size_t M = count_prefixed(h, i, "x_");
    i += M;
    const std::size_t o = count_prefixed(h, i, "y_");
    i += o;
    const std::size_t D = count_prefixed(h, i, "theta_");
    i += D;
    const bool cp = i < h.size() && h[i] == "changepoint";
    if (cp) ++i;
    if (i != h.size()) throw std::invalid_argument("stream csv: unexpected column '" + h[i] + "'");

    const auto T = static_cast<Eigen::Index>(lines.size() - 1);
    Stream s;
    s.X.resize(T, static_cast<Eigen::Index>(M));
    s.Y.resize(T, static_cast<Eigen::Index>(o));
    if (D > 0) s.theta.resize(T, static_cast<Eigen::Index>(D));
    for (Eigen::Index t = 0; t < T; ++t) {
        const std::vector<std::string> f = split_csv_line(lines[static_cast<std::size_t>(t) + 1]);
        if (f.size() != h.size()) throw std::invalid_argument("stream csv: ragged row " + std::to_string(t));
        if (parse_long(f[0]) != t) throw std::invalid_argument("stream csv: t out of sequence");
        std::size_t k = 1;
        for (std::size_t j = 0; j < M; ++j) s.X(t, static_cast<Eigen::Index>(j)) = parse_double(f[k++]);
        for (std::size_t j = 0; j < o; ++j) s.Y(t, static_cast<Eigen::Index>(j)) = parse_double(f[k++]);
        for (std::size_t j = 0; j < D; ++j) s.theta(t, static_cast<Eigen::Index>(j)) = parse_double(f[k++]);
        if (cp) s.changepoint.push_back(static_cast<int>(parse_long(f[k++])));
    }
    return s;
}

std::string metrics_to_csv(const std::vector<MethodRun>& runs) {
    const std::vector<std::string>* cols = nullptr;
    for (const MethodRun& r : runs) {
        if (!r.error.empty()) continue;
        if (cols == nullptr) cols = &r.columns;
        else if (*cols != r.columns) throw std::invalid_argument("metrics csv: runs disagree on columns");
    }
    std::string out = "method,seed,t";
    if (cols != nullptr) {
        for (const std::string& c : *cols) out += "," + c;
    }
    out += '\n';
    for (const MethodRun& r : runs) {
        if (!r.error.empty()) continue;
        const std::string prefix = r.method_id + "," + std::to_string(r.seed) + ",";
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            out += prefix + std::to_string(r.t[i]);
            for (double v : r.rows[i]) out += "," + format_double(v);
            out += '\n';
        }
    }
    return out;
}

MetricsTable metrics_from_csv(std::string_view csv) {
    const std::vector<std::string_view> lines = lines_of(csv);
    if (lines.empty()) throw std::invalid_argument("metrics csv: missing header");
    const std::vector<std::string> h = split_csv_line(lines[0]);
    if (h.size() < 3 || h[0] != "method" || h[1] != "seed" || h[2] != "t") {
        throw std::invalid_argument("metrics csv: header must start with method,seed,t");
    }
    MetricsTable tab;
    tab.columns.assign(h.begin() + 3, h.end());
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const std::vector<std::string> f = split_csv_line(lines[l]);
        if (f.size() != h.size()) throw std::invalid_argument("metrics csv: ragged row " + std::to_string(l));
        tab.method.push_back(f[0]);
        tab.seed.push_back(static_cast<std::uint64_t>(parse_long(f[1])));
        tab.t.push_back(parse_long(f[2]));
        std::vector<double> row;
        for (std::size_t k = 3; k < f.size(); ++k) row.push_back(parse_double(f[k]));
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

}  // namespace rbe
