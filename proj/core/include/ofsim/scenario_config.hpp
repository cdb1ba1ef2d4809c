#ifndef OFSIM_SCENARIO_CONFIG_HPP
#define OFSIM_SCENARIO_CONFIG_HPP

#include <string>

#include "ofsim/world.hpp"

namespace ofsim::sim {

/// Parses the JSON scenario-config text (see README for the schema);
/// throws ConfigError with a diagnostic on malformed input.
WorldConfig parse_world_config(const std::string& json_text);

/// Loads and parses a config file; throws ConfigError if unreadable.
WorldConfig load_world_config(const std::string& path);

std::string world_config_to_json(const WorldConfig& cfg);

}  // namespace ofsim::sim

#endif
