#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "collage/simulator.hpp"

namespace collage {

struct SimulationConfig {
  Workload workload;
  std::vector<Scheme> schemes;
};

/// Parses the simulation config document (JSON; schema in docs/config.md).
/// Relative trace paths resolve against base_dir. Throws ConfigError naming
/// the offending field.
SimulationConfig parse_simulation_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});

SimulationConfig load_simulation_config(const std::filesystem::path& path);

/// Reads a `task_id,kind,latency_ms` CSV; kind is `single` or `collage`.
/// Throws ParseError (byte offset of the bad row).
LatencyTrace parse_trace_csv(std::string_view text);

}  // namespace collage
