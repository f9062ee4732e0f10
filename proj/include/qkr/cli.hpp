#pragma once

#include "qkr/config.hpp"
#include "qkr/io.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qkr {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRuntime = 3,
  kExitEstimation = 4,
};

/// Derived quantities printed by dump-params and recorded in manifests.
KeyValues derived_quantities(const RunConfig& cfg);

/// Data products of each command, built in memory.
OutputSet localize_outputs(const RunConfig& cfg);
OutputSet scan_outputs(const RunConfig& cfg);
OutputSet micromotion_outputs(const RunConfig& cfg);

std::string render_manifest(const RunConfig& cfg, const OutputSet& outputs, double wall_clock_s);

/// Entry point: `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qkr
