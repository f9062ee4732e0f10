#include "qkr/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace qkr {

namespace {

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string key_value_block(const KeyValues& values, const std::string& prefix = "") {
  std::string out;
  for (const auto& [k, v] : values) out += prefix + k + " = " + v + "\n";
  return out;
}

std::vector<double> scan_row(const ScanResult& scan, Eigen::Index i, const PhysicalConstants& c) {
  return {scan.alpha_hz(i),
          scan.v_native(i),
          native_to_velocity(scan.v_native(i), c) * 1e6,
          scan.p_mean(i),
          2.0 * scan.p_mean(i),
          scan.noise_sigma};
}

CsvTable scan_table(const ScanResult& scan, const RunConfig& cfg, int n_kicks) {
  const PhysicalConstants constants = cfg.constants();
  CsvTable table;
  table.comments = {"lattice-velocity scan, <p> - p0 after " + std::to_string(n_kicks) + " kicks",
                    "native momentum unit = 2 hbar k; v_native = v / (2 hbar k / M)",
                    "seed = " + std::to_string(scan.seed)};
  table.header = {"alpha_hz", "v_native", "v_um_s", "p_mean_native", "p_mean_hbar_k", "noise_sigma"};
  for (Eigen::Index i = 0; i < scan.v_native.size(); ++i) table.rows.push_back(scan_row(scan, i, constants));
  return table;
}

ScanResult run_configured_scan(const RunConfig& cfg, const SimParams& sim) {
  const PhysicalConstants constants = cfg.constants();
  const NoiseModel noise{cfg.noise_sigma, cfg.seed};
  if (!cfg.v_list.empty()) {
    const Eigen::Map<const Eigen::VectorXd> v(cfg.v_list.data(), Eigen::Index(cfg.v_list.size()));
    return early_time_scan(constants, sim, v, cfg.scan_kicks, noise, cfg.grid);
  }
  const Eigen::VectorXd alpha = frequency_range(cfg.alpha_min_hz, cfg.alpha_max_hz, cfg.alpha_step_hz);
  return early_time_scan_alpha(constants, sim, alpha, cfg.scan_kicks, noise, cfg.grid);
}

}  // namespace

KeyValues derived_quantities(const RunConfig& cfg) {
  const PhysicalConstants c = cfg.constants();
  const double t = cfg.sim.t_kick;
  const double v_zero = c.lambda() / (4.0 * t);
  KeyValues d;
  d["hbar_eff_from_t_kick"] = format_number(c.hbar_eff_for_period(t));
  d["hbar_eff_used"] = format_number(cfg.sim.hbar_eff);
  d["kick_strength_k_over_hbar_eff"] = format_number(cfg.sim.K / cfg.sim.hbar_eff);
  d["chaotic_regime"] = cfg.sim.chaotic_regime() ? "true" : "false";
  d["v_recoil_m_s"] = format_number(c.v_recoil());
  d["omega_recoil_rad_s"] = format_number(c.omega_recoil());
  d["recoil_frequency_difference_hz"] = format_number(recoil_frequency_difference(c));
  d["zero_crossing_velocity_m_s"] = format_number(v_zero);
  d["zero_crossing_velocity_hbar_k"] = format_number(v_zero / c.v_recoil());
  d["zero_crossing_velocity_native"] = format_number(velocity_to_native(v_zero, c));
  d["lattice_velocity_m_s"] = format_number(alpha_to_lattice_velocity(cfg.sim.alpha, c));
  d["p_micro_um_s"] = format_number(momentum_units(cfg.p_micro, c).um_per_s);
  return d;
}

OutputSet localize_outputs(const RunConfig& cfg) {
  const Scenario scenario = cfg.sim.alpha != 0.0 ? Scenario::moving_lattice : Scenario::moving_bec;
  const LocalizationRun run = run_localization(cfg.sim, scenario, cfg.record_at, cfg.grid);

  OutputSet outputs;
  CsvTable asym;
  asym.comments = {std::string("scenario = ") +
                       (scenario == Scenario::moving_lattice ? "moving_lattice" : "moving_bec"),
                   "asymmetry about p0 = " + format_number(cfg.sim.p0) + " (native units)"};
  asym.header = {"kick", "asymmetry", "mean_p_native", "mean_p_hbar_k"};
  for (std::size_t i = 0; i < run.kicks.size(); ++i) {
    const auto& dist = run.distributions[i];
    CsvTable table;
    table.comments = {"momentum distribution after " + std::to_string(run.kicks[i]) + " kicks",
                      "tail mass (outer 10% of axis) = " + format_number(run.tail_mass[i])};
    table.header = {"q_native", "q_hbar_k", "prob"};
    table.rows.reserve(std::size_t(dist.q.size()));
    for (Eigen::Index j = 0; j < dist.q.size(); ++j) {
      table.rows.push_back({dist.q(j), 2.0 * dist.q(j), dist.prob(j)});
    }
    outputs.add("distribution_k" + std::to_string(run.kicks[i]) + ".csv", table.render());
    asym.rows.push_back({double(run.kicks[i]), run.asymmetry[i], run.mean_p[i], 2.0 * run.mean_p[i]});
  }
  outputs.add("asymmetry.csv", asym.render());
  return outputs;
}

OutputSet scan_outputs(const RunConfig& cfg) {
  const PhysicalConstants constants = cfg.constants();
  const ScanResult scan = run_configured_scan(cfg, cfg.sim);

  OutputSet outputs;
  outputs.add("scan.csv", scan_table(scan, cfg, cfg.scan_kicks).render());

  KeyValues fit_summary;
  fit_summary["predicted_period_m_s"] = format_number(constants.lambda() / (2.0 * cfg.sim.t_kick));
  try {
    const SinusoidFit fit = fit_sinusoid(scan, cfg.sim.t_kick, constants);
    fit_summary["status"] = "ok";
    fit_summary["c_native"] = format_number(fit.c);
    fit_summary["c_hbar_k"] = format_number(2.0 * fit.c);
    fit_summary["period_m_s"] = format_number(fit.period_v);
    fit_summary["period_native"] = format_number(velocity_to_native(fit.period_v, constants));
    fit_summary["phase_rad"] = format_number(fit.phase_offset);
    fit_summary["residual_rms_native"] = format_number(fit.residual_rms);
    fit_summary["iterations"] = std::to_string(fit.iterations);
  } catch (const EstimationError& e) {
    fit_summary["status"] = std::string("not fitted: ") + e.what();
  }
  std::string crossings;
  for (double v : zero_crossings(scan)) crossings += (crossings.empty() ? "" : ",") + format_number(v);
  fit_summary["zero_crossings_native"] = crossings;
  outputs.add("sinusoid_fit.txt", "# fit of <p> = c sin(2 pi v / period + phase)\n" +
                                      key_value_block(fit_summary));
  return outputs;
}

OutputSet micromotion_outputs(const RunConfig& cfg) {
  const PhysicalConstants constants = cfg.constants();
  MicromotionOptions options;
  options.p_micro = cfg.p_micro;
  options.alpha_min = cfg.alpha_min_hz;
  options.alpha_max = cfg.alpha_max_hz;
  options.alpha_step = cfg.alpha_step_hz;
  options.window_half_width = cfg.window;
  options.noise = {cfg.noise_sigma, cfg.seed};

  ScanResult scan;
  if (cfg.v_list.empty()) {
    scan = micromotion_scan(constants, cfg.sim, options, cfg.grid);
  } else {
    SimParams sim = cfg.sim;
    sim.p0 = cfg.p_micro;
    scan = run_configured_scan(cfg, sim);
  }
  const MicromotionEstimate est = estimate_zero_crossing(scan, constants, cfg.window);

  OutputSet outputs;
  outputs.add("micromotion_scan.csv", scan_table(scan, cfg, 2).render());
  KeyValues summary;
  summary["v_zero_native"] = format_number(est.v_zero.native);
  summary["sigma_v_native"] = format_number(est.sigma_v.native);
  summary["v_zero_hbar_k"] = format_number(est.v_zero.hbar_k);
  summary["sigma_v_hbar_k"] = format_number(est.sigma_v.hbar_k);
  summary["v_zero_um_s"] = format_number(est.v_zero.um_per_s);
  summary["sigma_v_um_s"] = format_number(est.sigma_v.um_per_s);
  summary["slope"] = format_number(est.slope);
  summary["window_min_native"] = format_number(est.window_min);
  summary["window_max_native"] = format_number(est.window_max);
  summary["n_points"] = std::to_string(est.n_points_used);
  outputs.add("estimate.txt", "# lattice velocity at <p(2T)> - p0 = 0 (linear fit)\n" +
                                  key_value_block(summary));
  return outputs;
}

std::string render_manifest(const RunConfig& cfg, const OutputSet& outputs, double wall_clock_s) {
  std::string m = "# qkr run manifest\n";
  m += std::string("version = ") + kVersion + "\n";
  m += "command = " + cfg.command + "\n";
  m += key_value_block(cfg.echo(), "config.");
  m += key_value_block(derived_quantities(cfg), "derived.");
  m += "wall_clock_s = " + format_number(wall_clock_s) + "\n";
  for (const auto& [name, content] : outputs.files()) {
    m += "sha256 " + name + " = " + sha256_hex(content) + "\n";
  }
  return m;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum kicked rotor in a moving lattice: localization, velocity scans, micromotion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Command {
    CLI::App* sub = nullptr;
    std::string config_path;
    bool dump = false;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Command> commands;
  const std::vector<std::pair<std::string, std::string>> descriptions = {
      {"localize", "long-time evolution: momentum distributions and asymmetry"},
      {"scan", "two-kick <p> versus lattice velocity with sinusoid fit"},
      {"micromotion", "zero-crossing estimate of a small BEC velocity"},
      {"dump-params", "print derived quantities without running"}};
  for (const auto& [name, description] : descriptions) {
    Command& cmd = commands[name];
    cmd.sub = app.add_subcommand(name, description);
    cmd.sub->add_option("--config", cmd.config_path, "key = value config file")->check(CLI::ExistingFile);
    if (name != "dump-params") {
      cmd.sub->add_flag("--dump-params", cmd.dump, "print derived quantities and exit");
    }
    for (const auto& key : known_config_keys()) {
      cmd.options[key] = cmd.sub->add_option("--" + dashed(key), cmd.flags[key]);
    }
  }
  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "check a run directory against its manifest checksums");
  verify->add_option("dir", verify_dir)->required();

  std::vector<const char*> argv{"qkr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  if (verify->parsed()) {
    try {
      const auto bad = verify_manifest(verify_dir);
      if (bad.empty()) {
        out << "ok\n";
        return kExitOk;
      }
      for (const auto& name : bad) err << "checksum mismatch: " << name << "\n";
      return kExitRuntime;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
  }

  auto selected = std::find_if(commands.begin(), commands.end(),
                               [](const auto& entry) { return entry.second.sub->parsed(); });
  const std::string name = selected->first;
  Command& cmd = selected->second;

  RunConfig cfg;
  try {
    KeyValues values = cmd.config_path.empty() ? KeyValues{} : read_key_values(cmd.config_path);
    for (const auto& [key, option] : cmd.options) {
      if (option->count() > 0) values[key] = cmd.flags[key];
    }
    cfg = make_run_config(name, values);
    if (name != "dump-params" && !cmd.dump && cfg.output_dir.empty()) {
      throw ConfigError("--out <dir> is required");
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (name == "dump-params" || cmd.dump) {
    out << key_value_block(derived_quantities(cfg));
    return kExitOk;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    OutputSet outputs;
    if (name == "localize") {
      outputs = localize_outputs(cfg);
    } else if (name == "scan") {
      outputs = scan_outputs(cfg);
    } else {
      outputs = micromotion_outputs(cfg);
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outputs.write(cfg.output_dir, render_manifest(cfg, outputs, elapsed));
    out << "wrote " << outputs.files().size() + 1 << " files to " << cfg.output_dir.string() << "\n";
    return kExitOk;
  } catch (const EstimationError& e) {
    err << "estimation failed: " << e.what() << "\n"
        << "hint: widen alpha_min_hz/alpha_max_hz so the scan brackets <p> = 0\n";
    return kExitEstimation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace qkr
