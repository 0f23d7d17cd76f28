#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "pvsc/hjb.hpp"
#include "pvsc/model.hpp"

namespace pvsc {

struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` text with dotted section names and '#' comments. The map
// is sorted, so serialization is canonical and hashable.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_flat_config(const std::string& text, const std::string& origin = "config");
ConfigMap read_flat_config(const std::string& path);
std::string serialize_flat_config(const ConfigMap& map);

// Builds a ModelConfig from the map. Unknown keys under the model sections
// are rejected; `grid.*` keys and `*.se` (standard-error annotations written
// by the calibrator) are ignored here.
ModelConfig model_config_from_map(const ConfigMap& map);
ConfigMap model_config_to_map(const ModelConfig& config);

// Solver grid from `grid.*` keys, with defaults tau=0.024 h, p in
// [-0.6, 0.6], p step 0.04, s step 0.005 MWh.
SolverGrid solver_grid_from_map(const ConfigMap& map, const ModelConfig& config);

// Accepts "HH:MM" or decimal hours.
double parse_time_hours(const std::string& text);

// Hash of the canonical serialization; ties checkpoints to their config.
std::uint64_t config_hash(const ModelConfig& config);

}  // namespace pvsc
