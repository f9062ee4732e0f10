#include "qkr/config.hpp"

#include "qkr/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace qkr {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError("config key '" + key + "': not a number: '" + text + "'");
  }
  return value;
}

long long to_integer(const std::string& key, const std::string& text) {
  long long value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': not an integer: '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues values;
  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!values.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return values;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str());
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "alpha_hz",      "alpha_max_hz", "alpha_min_hz", "alpha_step_hz", "hbar_eff", "k",
      "kicks",         "lambda_nm",    "mass_kg",      "n_cells",       "n_points", "noise_sigma",
      "out",           "p0",           "p_micro",      "pulse_width_us", "record",  "scan_kicks",
      "seed",          "sigma_w",      "substeps",     "t_kick_us",     "v_list",   "window"};
  return keys;
}

PhysicalConstants RunConfig::constants() const {
  return PhysicalConstants(PhysicalConstants::kCodataHbar, mass_kg, lambda_nm * 1e-9);
}

KeyValues RunConfig::echo() const {
  KeyValues out;
  out["alpha_hz"] = format_number(sim.alpha);
  out["alpha_max_hz"] = format_number(alpha_max_hz);
  out["alpha_min_hz"] = format_number(alpha_min_hz);
  out["alpha_step_hz"] = format_number(alpha_step_hz);
  out["hbar_eff"] = format_number(sim.hbar_eff);
  out["k"] = format_number(sim.K);
  out["kicks"] = std::to_string(sim.n_kicks);
  out["lambda_nm"] = format_number(lambda_nm);
  out["mass_kg"] = format_number(mass_kg);
  out["n_cells"] = std::to_string(grid.n_cells);
  out["n_points"] = std::to_string(grid.n_points);
  out["noise_sigma"] = format_number(noise_sigma);
  out["p0"] = format_number(sim.p0);
  out["p_micro"] = format_number(p_micro);
  out["pulse_width_us"] = format_number(sim.pulse_width * 1e6);
  std::string record;
  for (std::size_t i = 0; i < record_at.size(); ++i) {
    record += (i ? "," : "") + std::to_string(record_at[i]);
  }
  out["record"] = record;
  out["scan_kicks"] = std::to_string(scan_kicks);
  out["seed"] = std::to_string(seed);
  out["sigma_w"] = format_number(sim.sigma_w);
  out["substeps"] = std::to_string(sim.substeps);
  out["t_kick_us"] = format_number(sim.t_kick * 1e6);
  std::string vs;
  for (std::size_t i = 0; i < v_list.size(); ++i) vs += (i ? "," : "") + format_number(v_list[i]);
  out["v_list"] = vs;
  out["window"] = format_number(window);
  return out;
}

RunConfig make_run_config(const std::string& command, const KeyValues& values) {
  const auto& known = known_config_keys();
  for (const auto& [key, value] : values) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  auto number = [&](const std::string& key, double fallback) {
    const auto* v = get(key);
    return v ? to_double(key, *v) : fallback;
  };
  auto integer = [&](const std::string& key, long long fallback) {
    const auto* v = get(key);
    return v ? to_integer(key, *v) : fallback;
  };

  RunConfig cfg;
  cfg.command = command;
  if (const auto* out = get("out")) cfg.output_dir = *out;
  const long long seed = integer("seed", 0);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  cfg.seed = std::uint64_t(seed);

  cfg.lambda_nm = number("lambda_nm", 780.0);
  cfg.mass_kg = number("mass_kg", PhysicalConstants::kRubidium87Mass);
  if (!(cfg.lambda_nm > 0.0) || !(cfg.mass_kg > 0.0)) {
    throw ConfigError("lambda_nm and mass_kg must be positive");
  }
  const PhysicalConstants constants = cfg.constants();

  cfg.sim.K = number("k", 5.0);
  cfg.sim.t_kick = number("t_kick_us", 24.3) * 1e-6;
  cfg.sim.alpha = number("alpha_hz", 0.0);
  cfg.sim.p0 = number("p0", 0.0);
  cfg.sim.sigma_w = number("sigma_w", 4.0 * std::numbers::pi);
  cfg.sim.pulse_width = number("pulse_width_us", 0.0) * 1e-6;
  cfg.sim.substeps = int(integer("substeps", cfg.sim.pulse_width > 0.0 ? 16 : 1));
  if (get("hbar_eff")) cfg.hbar_eff = number("hbar_eff", 0.0);
  try {
    const LatticeConfig lattice(constants, cfg.sim.t_kick, cfg.sim.alpha, cfg.hbar_eff);
    cfg.sim.hbar_eff = lattice.hbar_eff();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const bool localize = command == "localize";
  const bool micromotion = command == "micromotion";
  cfg.sim.n_kicks = int(integer("kicks", localize ? 50 : 2));

  cfg.grid.n_points = integer("n_points", 2048);
  cfg.grid.n_cells = integer("n_cells", 64);

  if (const auto* rec = get("record")) {
    for (const auto& item : split_list(*rec)) cfg.record_at.push_back(int(to_integer("record", item)));
  } else {
    cfg.record_at.push_back(cfg.sim.n_kicks);
  }
  std::sort(cfg.record_at.begin(), cfg.record_at.end());
  cfg.record_at.erase(std::unique(cfg.record_at.begin(), cfg.record_at.end()), cfg.record_at.end());

  cfg.alpha_min_hz = number("alpha_min_hz", micromotion ? -3.0e3 : 0.0);
  cfg.alpha_max_hz = number("alpha_max_hz", micromotion ? 3.0e3 : 75.0e3);
  cfg.alpha_step_hz = number("alpha_step_hz", 100.0);
  if (const auto* vs = get("v_list")) {
    for (const auto& item : split_list(*vs)) cfg.v_list.push_back(to_double("v_list", item));
    if (cfg.v_list.empty()) throw ConfigError("scan list is empty");
  }
  cfg.scan_kicks = int(integer("scan_kicks", 2));
  cfg.noise_sigma = number("noise_sigma", 0.0);
  cfg.p_micro = number("p_micro", 0.0);
  cfg.window = number("window", 0.25);

  // Preconditions of the modules the command will call.
  try {
    cfg.sim.validate();
    const auto grid = std::make_shared<const Grid<double>>(
        build_grid<double>(cfg.grid.n_points, cfg.grid.n_cells));
    init_coherent_state(grid, cfg.sim.sigma_w, micromotion ? cfg.p_micro : cfg.sim.p0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
  if (!(cfg.window > 0.0)) throw ConfigError("window must be positive");
  if (cfg.scan_kicks < 1) throw ConfigError("scan_kicks must be at least 1");

  if (localize) {
    if (cfg.sim.alpha != 0.0 && cfg.sim.p0 != 0.0) {
      throw ConfigError("localize: set either p0 (moving BEC) or alpha_hz (moving lattice), not both");
    }
    if (!cfg.record_at.empty() && (cfg.record_at.front() < 0 || cfg.record_at.back() > cfg.sim.n_kicks)) {
      throw ConfigError("record entries must lie in [0, kicks]");
    }
  }
  if (command == "scan" || micromotion) {
    if (!(cfg.alpha_step_hz > 0.0)) throw ConfigError("alpha_step_hz must be positive");
    if (cfg.v_list.empty() && !(cfg.alpha_max_hz >= cfg.alpha_min_hz)) {
      throw ConfigError("scan range is empty: alpha_max_hz < alpha_min_hz");
    }
    for (std::size_t i = 1; i < cfg.v_list.size(); ++i) {
      if (!(cfg.v_list[i] > cfg.v_list[i - 1])) throw ConfigError("v_list must be strictly increasing");
    }
  }
  return cfg;
}

}  // namespace qkr
