// JSON config file <-> SimConfig.

#pragma once

#include "brownsim/model.hpp"

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>

namespace brownsim {

// Structural problems: malformed JSON, wrong types, unknown enum names.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

SimConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const SimConfig& config);

// Reads a config file (comments allowed). A relative trace path is resolved
// against the config file's directory.
SimConfig load_config(const std::filesystem::path& path);

// Command-line overrides applied on top of a loaded config.
struct Overrides {
    std::optional<std::string> policy;
    std::optional<std::uint64_t> seed;
    std::optional<double> scale;
    std::optional<std::string> trace_path;
    std::optional<double> overloaded_threshold;
    std::optional<double> optional_pct;
};

// Throws ConfigError for an unknown policy name. The optional percentage is
// applied by rescaling the container weights, so the config stays valid.
void apply_overrides(SimConfig& config, const Overrides& overrides);

} // namespace brownsim
