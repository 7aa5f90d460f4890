#pragma once

#include <string>

#include "aprox/harness.hpp"
#include "json.hpp"

namespace aprox {

// JSON mirrors RunConfig field names. "model" accepts one name or a list.
// Unknown keys and out-of-range values raise ConfigError.
nlohmann::json to_json(const GenSpec& spec);
nlohmann::json to_json(const RunConfig& config);
GenSpec gen_spec_from_json(const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j);

// Parses RunConfig text, or a metadata document whose "config" member is one.
// Syntax errors keep nlohmann's line/column diagnostic.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

std::string version_string();

// {config, version, started_at, seeds: {master}}
nlohmann::json make_metadata(const RunConfig& config, const std::string& started_at);
std::string rfc3339_now();

}  // namespace aprox
