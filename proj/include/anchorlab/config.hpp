#pragma once

// Flat `key = value` run configuration. `#` starts a comment, nested settings
// use dotted keys (anchor.alpha), and unknown or inapplicable keys are errors
// reported with their line number.

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "anchorlab/benchgen.hpp"

namespace anchorlab {

struct ConfigValue {
  std::string text;
  int line = 0;
};

using ConfigMap = std::map<std::string, ConfigValue>;

// Syntax only: splits lines into key/value pairs. Throws ConfigError on
// malformed lines and duplicate keys.
ConfigMap parse_config(std::istream& in, const std::string& source = "<config>");

// Applies the map over default_pipeline_config(method) and validates every
// range, naming the offending key.
PipelineConfig load_pipeline_config(const ConfigMap& map, const std::string& source = "<config>");
PipelineConfig load_pipeline_config_file(const std::string& path);

// Every parameter with its resolved value, in a fixed order; rendering these
// as `key = value` lines gives a config that reproduces the run.
std::vector<std::pair<std::string, std::string>> resolved_parameters(const PipelineConfig& cfg);

// Overrides a single key (used by sweeps); same validation as the loader.
PipelineConfig with_override(const PipelineConfig& cfg, const std::string& key,
                             const std::string& value);

}  // namespace anchorlab
