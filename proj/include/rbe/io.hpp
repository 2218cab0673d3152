/**
 * @file io.hpp
 * @brief Locale-independent CSV and JSON output with atomic file writes.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rbe/datagen.hpp"
#include "rbe/experiment.hpp"

namespace rbe {

/// Shortest representation that parses back to the same value; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

/// Parse a number written by format_double. @throws std::invalid_argument.
double parse_double(std::string_view s);

/// Write to a sibling temporary file and rename it over @p path. Creates parent directories.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Read a whole file. @throws std::runtime_error if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Stream CSV: t,x_0..x_{M-1},y_0..y_{o-1}[,theta_0..theta_{D-1}][,changepoint].
std::string stream_to_csv(const Stream& s);

/// Inverse of stream_to_csv. @throws std::invalid_argument on malformed input.
Stream stream_from_csv(std::string_view csv);

/// Metrics CSV: method,seed,t,<columns>. All successful runs must share their columns.
std::string metrics_to_csv(const std::vector<MethodRun>& runs);

struct MetricsTable {
    std::vector<std::string> columns;  ///< without method, seed, t
    std::vector<std::string> method;
    std::vector<std::uint64_t> seed;
    std::vector<long> t;
    std::vector<std::vector<double>> rows;
};

/// Parse a metrics CSV written by metrics_to_csv.
MetricsTable metrics_from_csv(std::string_view csv);

/// Split one CSV line on ','. Fields are never quoted by this library.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace rbe
