// Run configuration: a flat key = value text format shared by config files
// and command-line flags.
#pragma once

#include "qkr/experiments.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qkr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment. Duplicate keys are errors.
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);

/// Every key accepted in a config file (flag spelling: dashes for underscores).
const std::vector<std::string>& known_config_keys();

struct RunConfig {
  std::string command;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  double lambda_nm = 780.0;
  double mass_kg = PhysicalConstants::kRubidium87Mass;
  std::optional<double> hbar_eff;  // derived from t_kick when absent
  SimParams sim;
  GridSpec grid;
  std::vector<int> record_at;

  // scan
  double alpha_min_hz = 0.0;
  double alpha_max_hz = 75.0e3;
  double alpha_step_hz = 100.0;
  std::vector<double> v_list;  // native units, overrides the alpha range
  int scan_kicks = 2;
  double noise_sigma = 0.0;

  // micromotion
  double p_micro = 0.0;
  double window = 0.25;

  PhysicalConstants constants() const;
  /// Echo of all settings as key/value pairs, in key order.
  KeyValues echo() const;
};

/// Builds and validates a config for `command` from merged key/values.
/// Unknown keys and violated preconditions raise ConfigError.
RunConfig make_run_config(const std::string& command, const KeyValues& values);

}  // namespace qkr
