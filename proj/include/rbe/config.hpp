/**
 * @file config.hpp
 * @brief Experiment configuration: parsing, validation and stream construction.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "rbe/datagen.hpp"

namespace rbe {

struct MethodSpec {
    std::string name;
    std::string id;  ///< label in outputs, defaults to name
    nlohmann::json params = nlohmann::json::object();
};

/**
 * @brief Validated experiment description.
 *
 * Top-level keys: experiment, generator {name, params}, seeds, methods
 * [{name, id?, params?}], metrics, warmup, model, output_dir, grid.
 * Unknown keys are rejected at every level.
 */
struct ExperimentConfig {
    std::string experiment;
    std::string generator;
    nlohmann::json generator_params = nlohmann::json::object();
    std::vector<std::uint64_t> seeds{0};
    std::vector<MethodSpec> methods;
    std::vector<std::string> metrics;  ///< summary metrics to keep, empty keeps all
    int warmup = 0;                    ///< leading steps used only as warm-up data
    nlohmann::json model = nlohmann::json::object();
    std::string output_dir = "out";
    nlohmann::json grid;  ///< sweep only: {param: [values...]}
    nlohmann::json raw;   ///< the input document, echoed into summary.json
};

/// Experiment ids understood by run_method().
const std::vector<std::string>& experiment_names();

/// Generator ids understood by make_stream().
const std::vector<std::string>& generator_names();

/**
 * @brief Parse and validate a config document.
 * @param require_methods false for the gen subcommand.
 * @throws std::invalid_argument with a message naming the offending key.
 */
ExperimentConfig parse_config(const nlohmann::json& j, bool require_methods = true);

/// Build a stream from a generator id and its parameters.
Stream make_stream(const std::string& generator, const nlohmann::json& params, std::uint64_t seed);

}  // namespace rbe
