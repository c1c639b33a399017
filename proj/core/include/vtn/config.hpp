#pragma once

#include <map>
#include <string>

#include "vtn/solver.hpp"

namespace vtn {

// Run settings shared by the command line subcommands. Loadable from a
// `key = value` file (# comments); explicit command line flags win.
struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  SolverConfig solver;  // includes the loss weights

  // Metric / transform knobs.
  double cap = 20.0;      // quantization range
  double max_mag = 0.0;   // color wheel magnitude scale, 0 = auto
  int window = 3;         // neighborhood for census / boundary / relaxation
  double guided_lambda = 0.1;

  // Default file locations, overridable per flag.
  std::map<std::string, std::string> paths;
};

// Parses one entry; `line` feeds error messages. Unknown keys are
// rejected. Path-valued keys land in cfg.paths.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value, int line);

RunConfig parse_config_file(const std::string& path);

}  // namespace vtn
