#include <doctest.h>

#include "qkr/cli.hpp"
#include "qkr/units.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qkr;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("qkr_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str(const std::string& sub = "") const { return (sub.empty() ? path_ : path_ / sub).string(); }

 private:
  fs::path path_;
};

std::map<std::string, std::string> read_summary(const fs::path& file) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_file(file));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

}  // namespace

TEST_CASE("localize writes one distribution per recorded kick") {
  TempDir dir;
  const auto r = run({"localize", "--kicks", "10", "--record", "0,5,10", "--p0", "1", "--out", dir.str()});
  REQUIRE(r.code == kExitOk);
  for (const char* name : {"distribution_k0.csv", "distribution_k5.csv", "distribution_k10.csv",
                           "asymmetry.csv", "manifest.txt"}) {
    CHECK(fs::exists(dir.path() / name));
  }
  const auto dist = parse_csv(read_file(dir.path() / "distribution_k10.csv"));
  CHECK(dist.header == std::vector<std::string>{"q_native", "q_hbar_k", "prob"});
  CHECK(dist.rows.size() == 2048);
  double total = 0.0;
  for (const auto& row : dist.rows) {
    CHECK(row[1] == 2.0 * row[0]);
    total += row[2];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const auto asym = parse_csv(read_file(dir.path() / "asymmetry.csv"));
  REQUIRE(asym.rows.size() == 3);
  CHECK(asym.rows[0][asym.column("kick")] == 0.0);
  for (const auto& row : asym.rows) {
    CHECK(row[asym.column("mean_p_hbar_k")] == 2.0 * row[asym.column("mean_p_native")]);
  }
  CHECK(run({"verify", dir.str()}).code == kExitOk);
}

TEST_CASE("localize with zero kicks records the initial state") {
  TempDir dir;
  REQUIRE(run({"localize", "--kicks", "0", "--out", dir.str()}).code == kExitOk);
  const auto asym = parse_csv(read_file(dir.path() / "asymmetry.csv"));
  REQUIRE(asym.rows.size() == 1);
  CHECK(std::abs(asym.rows[0][asym.column("asymmetry")]) < 1e-12);
}

TEST_CASE("reruns are byte-identical and the manifest detects corruption") {
  TempDir a, b;
  const std::vector<std::string> common{"micromotion", "--p-micro", "0.0195", "--noise-sigma", "0.001",
                                        "--seed", "17"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"--out", a.str()});
  args_b.insert(args_b.end(), {"--out", b.str()});
  REQUIRE(run(args_a).code == kExitOk);
  REQUIRE(run(args_b).code == kExitOk);
  for (const char* name : {"micromotion_scan.csv", "estimate.txt"}) {
    CHECK(read_file(a.path() / name) == read_file(b.path() / name));
  }

  const auto manifest = read_summary(a.path() / "manifest.txt");
  CHECK(manifest.at("version") == kVersion);
  CHECK(manifest.at("config.seed") == "17");
  CHECK(manifest.count("derived.hbar_eff_used") == 1);
  CHECK(manifest.count("wall_clock_s") == 1);

  CHECK(run({"verify", a.str()}).code == kExitOk);
  std::ofstream(a.path() / "estimate.txt", std::ios::app) << "tampered\n";
  const auto bad = run({"verify", a.str()});
  CHECK(bad.code == kExitRuntime);
  CHECK(bad.err.find("estimate.txt") != std::string::npos);
}

TEST_CASE("micromotion estimate and scan columns") {
  TempDir dir;
  REQUIRE(run({"micromotion", "--p-micro", "0.0195", "--out", dir.str()}).code == kExitOk);
  const PhysicalConstants c;
  const auto est = read_summary(dir.path() / "estimate.txt");
  const double v = std::stod(est.at("v_zero_native"));
  CHECK(v == doctest::Approx(0.0195).epsilon(0.02));
  CHECK(std::stod(est.at("v_zero_hbar_k")) == 2.0 * v);
  CHECK(std::stod(est.at("v_zero_um_s")) == doctest::Approx(momentum_units(v, c).um_per_s).epsilon(1e-15));

  const auto scan = parse_csv(read_file(dir.path() / "micromotion_scan.csv"));
  CHECK(scan.rows.size() == 61);
  for (const auto& row : scan.rows) {
    const double v_native = row[scan.column("v_native")];
    CHECK(v_native == velocity_to_native(alpha_to_lattice_velocity(row[scan.column("alpha_hz")], c), c));
    CHECK(row[scan.column("v_um_s")] == native_to_velocity(v_native, c) * 1e6);
    CHECK(row[scan.column("p_mean_hbar_k")] == 2.0 * row[scan.column("p_mean_native")]);
  }
}

TEST_CASE("micromotion with the coarser frequency step") {
  TempDir dir;
  REQUIRE(run({"micromotion", "--alpha-step-hz", "250", "--out", dir.str()}).code == kExitOk);
  CHECK(parse_csv(read_file(dir.path() / "micromotion_scan.csv")).rows.size() == 25);
}

TEST_CASE("scan with an explicit velocity list and a fitted sinusoid") {
  TempDir dir;
  std::string vs;
  for (int i = -20; i <= 20; ++i) vs += (i > -20 ? "," : "") + std::to_string(0.1 * i);
  REQUIRE(run({"scan", "--v-list", vs, "--out", dir.str()}).code == kExitOk);
  const auto fit = read_summary(dir.path() / "sinusoid_fit.txt");
  CHECK(fit.at("status") == "ok");
  CHECK(std::stod(fit.at("period_m_s")) ==
        doctest::Approx(std::stod(fit.at("predicted_period_m_s"))).epsilon(0.02));
  CHECK(parse_csv(read_file(dir.path() / "scan.csv")).rows.size() == 41);
}

TEST_CASE("configuration errors exit with code 2 and write nothing") {
  TempDir dir;
  CHECK(run({"scan", "--v-list", "", "--out", dir.str()}).code == kExitConfig);
  CHECK(run({"scan", "--bogus", "1", "--out", dir.str()}).code == kExitConfig);
  CHECK(run({"localize", "--kicks", "5", "--record", "9", "--out", dir.str()}).code == kExitConfig);
  CHECK(run({"localize", "--p0", "1", "--alpha-hz", "100", "--out", dir.str()}).code == kExitConfig);
  CHECK(run({"localize"}).code == kExitConfig);
  CHECK(run({}).code == kExitConfig);

  const fs::path cfg = dir.path().parent_path() / (dir.path().filename().string() + ".cfg");
  std::ofstream(cfg) << "kicks = 5\nunknown_key = 3\n";
  const auto r = run({"localize", "--config", cfg.string(), "--out", dir.str()});
  fs::remove(cfg);
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("unknown_key") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path()));
}

TEST_CASE("config file values are overridden by flags") {
  TempDir dir;
  const fs::path cfg = dir.path().parent_path() / (dir.path().filename().string() + ".cfg");
  std::ofstream(cfg) << "# localization run\nkicks = 4\np0 = 0.5\n";
  const auto r = run({"localize", "--config", cfg.string(), "--kicks", "3", "--out", dir.str()});
  fs::remove(cfg);
  REQUIRE(r.code == kExitOk);
  const auto manifest = read_summary(dir.path() / "manifest.txt");
  CHECK(manifest.at("config.kicks") == "3");
  CHECK(fs::exists(dir.path() / "distribution_k3.csv"));
}

TEST_CASE("an unbracketed crossing exits with code 4 and writes nothing") {
  TempDir dir;
  const auto r = run({"micromotion", "--p-micro", "0.5", "--out", dir.str()});
  CHECK(r.code == kExitEstimation);
  CHECK(r.err.find("zero crossing not bracketed") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path()));
}

TEST_CASE("dump-params prints derived quantities") {
  const auto r = run({"dump-params"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("hbar_eff_from_t_kick = ") != std::string::npos);
  CHECK(r.out.find("recoil_frequency_difference_hz = ") != std::string::npos);
  const auto flag = run({"micromotion", "--dump-params"});
  CHECK(flag.code == kExitOk);
  CHECK(flag.out == r.out);
}

TEST_CASE("installed binary reports exit codes") {
  const std::string exe = QKR_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int raw = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("--version") == 0);
  CHECK(status("dump-params") == 0);
  CHECK(status("scan --bogus 1") == 2);
}
