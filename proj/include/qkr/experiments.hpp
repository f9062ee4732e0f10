// Long-time asymmetric localization, the two-kick velocity scan with its
// sinusoid fit, and micromotion estimation from the scan's zero crossing.
#pragma once

#include "qkr/fitting.hpp"
#include "qkr/observables.hpp"
#include "qkr/propagator.hpp"
#include "qkr/units.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qkr {

/// 32 points per lattice period over 64 periods: q in [-16, 16) native units.
struct GridSpec {
  Eigen::Index n_points = 2048;
  Eigen::Index n_cells = 64;
};

std::shared_ptr<const Grid<double>> make_grid(const GridSpec& spec);

/// Probability in the outermost 10% of the momentum axis (aliasing guard).
double tail_mass(const MomentumDistribution& dist, double fraction = 0.1);

enum class Scenario { moving_bec, moving_lattice, mixed };

struct LocalizationRun {
  std::vector<int> kicks;
  std::vector<MomentumDistribution> distributions;
  std::vector<double> asymmetry;
  std::vector<double> mean_p;  // native units
  std::vector<double> tail_mass;
};

/// Moving BEC (alpha = 0), moving lattice (p0 = 0), or both.
/// Asymmetry is measured about the launch momentum p0.
LocalizationRun run_localization(const SimParams& params, Scenario scenario,
                                 std::span<const int> record_at, const GridSpec& grid = {});

struct NoiseModel {
  double sigma = 0.0;  // native units, additive Gaussian on <p>
  std::uint64_t seed = 0;
};

struct ScanResult {
  Eigen::VectorXd v_native;  // lattice velocity, native units (2 hbar k / M)
  Eigen::VectorXd alpha_hz;
  Eigen::VectorXd p_mean;    // <p(nT)> - p0, native units
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Lattice-velocity scan: for each v, alpha = velocity_to_alpha(v), evolve
/// `n_kicks` kicks from params.p0 and record <p> - p0. Scan points run
/// concurrently; results are ordered as `v_native`.
ScanResult early_time_scan(const PhysicalConstants& constants, const SimParams& params,
                           const Eigen::Ref<const Eigen::VectorXd>& v_native, int n_kicks = 2,
                           const NoiseModel& noise = {}, const GridSpec& grid = {});

/// Same scan with lattice frequencies given directly.
ScanResult early_time_scan_alpha(const PhysicalConstants& constants, const SimParams& params,
                                 const Eigen::Ref<const Eigen::VectorXd>& alpha_hz, int n_kicks = 2,
                                 const NoiseModel& noise = {}, const GridSpec& grid = {});

/// Returns a copy of `scan` with fresh Gaussian noise on p_mean. Each point
/// draws from its own generator seeded from (seed, index).
ScanResult with_noise(const ScanResult& scan, const NoiseModel& noise);

/// alpha_min, alpha_min + step, ..., up to alpha_max (inclusive within 1e-9 step).
Eigen::VectorXd frequency_range(double alpha_min, double alpha_max, double step);

/// Sign changes of p_mean located by linear interpolation (native velocity).
std::vector<double> zero_crossings(const ScanResult& scan);

struct SinusoidFit {
  double c = 0.0;             // native units
  double period_v = 0.0;      // m/s
  double phase_offset = 0.0;  // rad
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares fit of c*sin(2*pi*v/period + phase) to the scan, starting
/// from period = lambda/(2T). Only points with |v| <= v_max (m/s) are used
/// when v_max is given.
SinusoidFit fit_sinusoid(const ScanResult& scan, double t_kick, const PhysicalConstants& constants,
                         std::optional<double> v_max = std::nullopt);

struct MicromotionEstimate {
  MomentumUnits v_zero;
  MomentumUnits sigma_v;
  double slope = 0.0;       // d<p>/dv, native/native
  double window_min = 0.0;  // native
  double window_max = 0.0;
  Eigen::Index n_points_used = 0;
};

struct MicromotionOptions {
  double p_micro = 0.0;        // native units
  double alpha_min = -3.0e3;   // Hz
  double alpha_max = 3.0e3;
  double alpha_step = 100.0;
  double window_half_width = 0.25;  // native units around the crossing
  double min_abs_slope = 1e-6;
  NoiseModel noise;
};

/// Two-kick scan with BEC momentum p_micro over the lattice frequency range.
ScanResult micromotion_scan(const PhysicalConstants& constants, const SimParams& params,
                            const MicromotionOptions& options, const GridSpec& grid = {});

/// Linear fit of <p> vs lattice velocity in a window centred on the zero
/// crossing; v_zero = -intercept/slope with its delta-method standard error.
MicromotionEstimate estimate_zero_crossing(const ScanResult& scan, const PhysicalConstants& constants,
                                           double window_half_width = 0.25,
                                           double min_abs_slope = 1e-6);

struct MicromotionResult {
  ScanResult scan;
  MicromotionEstimate estimate;
};

MicromotionResult estimate_micromotion(const PhysicalConstants& constants, const SimParams& params,
                                       const MicromotionOptions& options, const GridSpec& grid = {});

/// Additive noise sigma (native) for which the zero-crossing fit of the
/// noiseless scan has standard error `target_sigma_v` (native).
double calibrate_noise_sigma(const ScanResult& noiseless, const PhysicalConstants& constants,
                             double target_sigma_v, double window_half_width = 0.25);

struct DiffusionSeries {
  std::vector<double> energy;  // <p^2>/2 after n kicks, n = 0..n_kicks
  std::optional<int> saturation_kick;
  double first_kick_increment = 0.0;
};

/// Energy growth and the first kick at which the 5-kick moving average
/// changes by less than 2% per kick.
DiffusionSeries diffusion_saturation(const SimParams& params, int n_kicks, const GridSpec& grid = {});

}  // namespace qkr
