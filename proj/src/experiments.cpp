#include "qkr/experiments.hpp"

#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <random>
#include <thread>

namespace qkr {

std::shared_ptr<const Grid<double>> make_grid(const GridSpec& spec) {
  return std::make_shared<const Grid<double>>(build_grid<double>(spec.n_points, spec.n_cells));
}

double tail_mass(const MomentumDistribution& dist, double fraction) {
  const Eigen::Index n = dist.prob.size();
  const auto edge = static_cast<Eigen::Index>(std::ceil(0.5 * fraction * double(n)));
  return dist.prob.head(edge).sum() + dist.prob.tail(edge).sum();
}

LocalizationRun run_localization(const SimParams& params, Scenario scenario,
                                 std::span<const int> record_at, const GridSpec& grid_spec) {
  params.validate();
  if (scenario == Scenario::moving_bec && params.alpha != 0.0) {
    throw std::invalid_argument("moving-BEC scenario requires a stationary lattice (alpha = 0)");
  }
  if (scenario == Scenario::moving_lattice && params.p0 != 0.0) {
    throw std::invalid_argument("moving-lattice scenario requires p0 = 0");
  }

  const auto grid = make_grid(grid_spec);
  Propagator<double> propagator(grid, params);
  const auto psi0 = init_coherent_state(grid, params.sigma_w, params.p0);
  const auto snapshots = propagator.evolve(psi0, record_at);

  LocalizationRun run;
  run.kicks.assign(record_at.begin(), record_at.end());
  for (const auto& psi : snapshots) {
    auto dist = momentum_distribution(psi, propagator.fft(), params.p0);
    run.asymmetry.push_back(asymmetry(dist));
    run.mean_p.push_back(mean_momentum(dist));
    run.tail_mass.push_back(tail_mass(dist));
    run.distributions.push_back(std::move(dist));
  }
  return run;
}

namespace {

template <typename Fn>
void parallel_for(Eigen::Index count, Fn&& body) {
  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<Eigen::Index>(std::min<std::size_t>(hw, std::size_t(count)));
  if (workers <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(std::size_t(workers));
  for (Eigen::Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Eigen::Index i = w; i < count; i += workers) body(i);
    });
  }
}

}  // namespace

ScanResult early_time_scan_alpha(const PhysicalConstants& constants, const SimParams& params,
                                 const Eigen::Ref<const Eigen::VectorXd>& alpha_hz, int n_kicks,
                                 const NoiseModel& noise, const GridSpec& grid_spec) {
  if (alpha_hz.size() == 0) throw std::invalid_argument("scan list is empty");
  if (n_kicks < 1) throw std::invalid_argument("scan needs at least one kick");
  for (Eigen::Index i = 1; i < alpha_hz.size(); ++i) {
    if (!(alpha_hz(i) > alpha_hz(i - 1))) {
      throw std::invalid_argument("scan velocities must be strictly increasing");
    }
  }

  const auto grid = make_grid(grid_spec);
  const auto psi0 = init_coherent_state(grid, params.sigma_w, params.p0);

  ScanResult scan;
  scan.alpha_hz = alpha_hz;
  scan.v_native = alpha_hz.unaryExpr([&](double a) {
    return velocity_to_native(alpha_to_lattice_velocity(a, constants), constants);
  });
  scan.p_mean.resize(alpha_hz.size());

  parallel_for(alpha_hz.size(), [&](Eigen::Index i) {
    SimParams point = params;
    point.alpha = alpha_hz(i);
    point.n_kicks = n_kicks;
    Propagator<double> propagator(grid, point);
    auto psi = psi0;
    for (int n = 1; n <= n_kicks; ++n) propagator.step(psi, n);
    scan.p_mean(i) = mean_momentum(momentum_distribution(psi, propagator.fft())) - params.p0;
  });

  return noise.sigma > 0.0 ? with_noise(scan, noise) : scan;
}

ScanResult early_time_scan(const PhysicalConstants& constants, const SimParams& params,
                           const Eigen::Ref<const Eigen::VectorXd>& v_native, int n_kicks,
                           const NoiseModel& noise, const GridSpec& grid) {
  const Eigen::VectorXd alpha = v_native.unaryExpr([&](double v) {
    return velocity_to_alpha(native_to_velocity(v, constants), constants);
  });
  ScanResult scan = early_time_scan_alpha(constants, params, alpha, n_kicks, noise, grid);
  scan.v_native = v_native;
  return scan;
}

ScanResult with_noise(const ScanResult& scan, const NoiseModel& noise) {
  ScanResult noisy = scan;
  noisy.noise_sigma = noise.sigma;
  noisy.seed = noise.seed;
  if (noise.sigma <= 0.0) return noisy;
  for (Eigen::Index i = 0; i < scan.p_mean.size(); ++i) {
    std::seed_seq seq{std::uint32_t(noise.seed), std::uint32_t(noise.seed >> 32), std::uint32_t(i)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    noisy.p_mean(i) += gauss(rng);
  }
  return noisy;
}

Eigen::VectorXd frequency_range(double alpha_min, double alpha_max, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("frequency step must be positive");
  if (!(alpha_max >= alpha_min)) throw std::invalid_argument("alpha_max must be >= alpha_min");
  const auto count = static_cast<Eigen::Index>(std::floor((alpha_max - alpha_min) / step + 1e-9)) + 1;
  Eigen::VectorXd alpha(count);
  for (Eigen::Index i = 0; i < count; ++i) alpha(i) = alpha_min + double(i) * step;
  return alpha;
}

std::vector<double> zero_crossings(const ScanResult& scan) {
  std::vector<double> crossings;
  const auto& v = scan.v_native;
  const auto& p = scan.p_mean;
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    if (p(i) == 0.0) {
      crossings.push_back(v(i));
    } else if ((p(i) < 0.0 && p(i + 1) > 0.0) || (p(i) > 0.0 && p(i + 1) < 0.0)) {
      crossings.push_back(v(i) - p(i) * (v(i + 1) - v(i)) / (p(i + 1) - p(i)));
    }
  }
  if (p.size() > 0 && p(p.size() - 1) == 0.0) crossings.push_back(v(v.size() - 1));
  return crossings;
}

namespace {

// Residuals c*sin(omega*u + phase) - y with u = v / period_guess.
struct SinusoidFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  Eigen::VectorXd u;
  Eigen::VectorXd y;

  int inputs() const { return 3; }
  int values() const { return int(u.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    f = x(0) * (x(1) * u.array() + x(2)).sin() - y.array();
    return 0;
  }
  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    const Eigen::ArrayXd arg = x(1) * u.array() + x(2);
    const Eigen::ArrayXd c = arg.cos();
    jac.resize(u.size(), 3);
    jac.col(0) = arg.sin().matrix();
    jac.col(1) = (x(0) * u.array() * c).matrix();
    jac.col(2) = (x(0) * c).matrix();
    return 0;
  }
};

}  // namespace

SinusoidFit fit_sinusoid(const ScanResult& scan, double t_kick, const PhysicalConstants& constants,
                         std::optional<double> v_max) {
  const double period_guess = constants.lambda() / (2.0 * t_kick);
  std::vector<double> us;
  std::vector<double> ys;
  for (Eigen::Index i = 0; i < scan.v_native.size(); ++i) {
    const double v = native_to_velocity(scan.v_native(i), constants);
    if (v_max && std::abs(v) > *v_max) continue;
    us.push_back(v / period_guess);
    ys.push_back(scan.p_mean(i));
  }
  if (us.size() < 8) throw EstimationError("sinusoid fit needs at least 8 scan points");
  const auto [umin, umax] = std::minmax_element(us.begin(), us.end());
  if (*umax - *umin < 0.5) throw EstimationError("sinusoid fit needs the scan to span half a period");

  SinusoidFunctor functor;
  functor.u = Eigen::Map<const Eigen::VectorXd>(us.data(), Eigen::Index(us.size()));
  functor.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), Eigen::Index(ys.size()));

  // Linear start at the predicted period: y ~ a*sin(2 pi u) + b*cos(2 pi u).
  const double omega0 = 2.0 * std::numbers::pi;
  Eigen::MatrixXd basis(functor.u.size(), 2);
  basis.col(0) = (omega0 * functor.u.array()).sin().matrix();
  basis.col(1) = (omega0 * functor.u.array()).cos().matrix();
  const Eigen::Vector2d ab = basis.colPivHouseholderQr().solve(functor.y);

  Eigen::VectorXd x(3);
  x << std::hypot(ab(0), ab(1)), omega0, std::atan2(ab(1), ab(0));

  Eigen::LevenbergMarquardt<SinusoidFunctor> lm(functor);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 2000;
  const auto status = lm.minimize(x);

  SinusoidFit fit;
  fit.iterations = int(lm.iter);
  fit.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
  if (!fit.converged) {
    throw EstimationError("sinusoid fit did not converge (status " + std::to_string(int(status)) +
                          ", " + std::to_string(lm.iter) + " iterations)");
  }

  double c = x(0);
  double omega = x(1);
  double phase = x(2);
  if (omega < 0.0) {
    omega = -omega;
    phase = -phase;
    c = -c;
  }
  phase = std::remainder(phase, 2.0 * std::numbers::pi);
  if (phase > 0.5 * std::numbers::pi) {
    phase -= std::numbers::pi;
    c = -c;
  } else if (phase <= -0.5 * std::numbers::pi) {
    phase += std::numbers::pi;
    c = -c;
  }
  fit.c = c;
  fit.period_v = 2.0 * std::numbers::pi / omega * period_guess;
  fit.phase_offset = phase;

  Eigen::VectorXd residual;
  functor(x, residual);
  fit.residual_rms = std::sqrt(residual.squaredNorm() / double(residual.size()));
  return fit;
}

namespace {

struct WindowedFit {
  LinearFit line;
  double window_min = 0.0;
  double window_max = 0.0;
};

WindowedFit fit_crossing_window(const ScanResult& scan, double half_width, double min_abs_slope) {
  const auto& v = scan.v_native;
  const auto& p = scan.p_mean;
  if (v.size() < 3) throw EstimationError("zero crossing not bracketed: fewer than 3 scan points");
  if (zero_crossings(scan).empty()) {
    throw EstimationError("zero crossing not bracketed: <p> does not change sign in the scan range");
  }

  auto fit_between = [&](double lo, double hi) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v(i) >= lo && v(i) <= hi) {
        xs.push_back(v(i));
        ys.push_back(p(i));
      }
    }
    if (xs.size() < 3) throw EstimationError("degenerate fit: fewer than 3 points in the window");
    const LinearFit line = fit_line(Eigen::Map<const Eigen::VectorXd>(xs.data(), Eigen::Index(xs.size())),
                                    Eigen::Map<const Eigen::VectorXd>(ys.data(), Eigen::Index(ys.size())));
    if (!(std::abs(line.slope) >= min_abs_slope)) {
      throw EstimationError("degenerate fit: |slope| below threshold");
    }
    return line;
  };

  const double vmin = v.minCoeff();
  const double vmax = v.maxCoeff();
  const double eps = 1e-9 * std::max(1.0, vmax - vmin);

  // First pass over the central segment, then re-centre symmetrically on
  // its root so odd curvature of <p>(v) does not bias the crossing.
  double guess = fit_between(-half_width - eps, half_width + eps).root();
  if (!(guess > vmin && guess < vmax)) {
    throw EstimationError("zero crossing not bracketed: first-pass root outside the scan range");
  }
  const double half = std::min({half_width, guess - vmin, vmax - guess});

  WindowedFit result;
  result.window_min = guess - half;
  result.window_max = guess + half;
  result.line = fit_between(result.window_min - eps, result.window_max + eps);
  const double root = result.line.root();
  if (!(root >= result.window_min && root <= result.window_max)) {
    throw EstimationError("zero crossing not bracketed: fitted root outside the fit window");
  }
  return result;
}

}  // namespace

MicromotionEstimate estimate_zero_crossing(const ScanResult& scan, const PhysicalConstants& constants,
                                           double window_half_width, double min_abs_slope) {
  if (!(window_half_width > 0.0)) throw std::invalid_argument("window half-width must be positive");
  const WindowedFit windowed = fit_crossing_window(scan, window_half_width, min_abs_slope);
  MicromotionEstimate est;
  est.v_zero = momentum_units(windowed.line.root(), constants);
  est.sigma_v = momentum_units(windowed.line.root_sigma(), constants);
  est.slope = windowed.line.slope;
  est.window_min = windowed.window_min;
  est.window_max = windowed.window_max;
  est.n_points_used = windowed.line.n;
  return est;
}

ScanResult micromotion_scan(const PhysicalConstants& constants, const SimParams& params,
                            const MicromotionOptions& options, const GridSpec& grid) {
  SimParams point = params;
  point.p0 = options.p_micro;
  point.alpha = 0.0;
  const Eigen::VectorXd alpha = frequency_range(options.alpha_min, options.alpha_max, options.alpha_step);
  return early_time_scan_alpha(constants, point, alpha, 2, options.noise, grid);
}

MicromotionResult estimate_micromotion(const PhysicalConstants& constants, const SimParams& params,
                                       const MicromotionOptions& options, const GridSpec& grid) {
  MicromotionResult result;
  result.scan = micromotion_scan(constants, params, options, grid);
  result.estimate = estimate_zero_crossing(result.scan, constants, options.window_half_width,
                                           options.min_abs_slope);
  return result;
}

double calibrate_noise_sigma(const ScanResult& noiseless, const PhysicalConstants& constants,
                             double target_sigma_v, double window_half_width) {
  if (!(target_sigma_v > 0.0)) throw std::invalid_argument("target sigma_v must be positive");
  (void)constants;
  const WindowedFit windowed = fit_crossing_window(noiseless, window_half_width, 0.0);
  const LinearFit& line = windowed.line;
  const double x0 = line.root();
  const double leverage =
      std::sqrt(1.0 / double(line.n) + (x0 - line.x_mean) * (x0 - line.x_mean) / line.sxx);
  return target_sigma_v * std::abs(line.slope) / leverage;
}

DiffusionSeries diffusion_saturation(const SimParams& params, int n_kicks, const GridSpec& grid_spec) {
  if (n_kicks < 20) throw std::invalid_argument("diffusion_saturation needs at least 20 kicks");
  SimParams run = params;
  run.n_kicks = n_kicks;
  const auto grid = make_grid(grid_spec);
  Propagator<double> propagator(grid, run);
  auto psi = init_coherent_state(grid, run.sigma_w, run.p0);

  DiffusionSeries series;
  series.energy.reserve(std::size_t(n_kicks) + 1);
  series.energy.push_back(mean_energy(momentum_distribution(psi, propagator.fft())));
  for (int n = 1; n <= n_kicks; ++n) {
    propagator.step(psi, n);
    series.energy.push_back(mean_energy(momentum_distribution(psi, propagator.fft())));
  }
  series.first_kick_increment = series.energy[1] - series.energy[0];

  constexpr int kWindow = 5;
  auto moving_average = [&](int n) {
    double sum = 0.0;
    for (int i = n - kWindow + 1; i <= n; ++i) sum += series.energy[std::size_t(i)];
    return sum / kWindow;
  };
  for (int n = kWindow; n <= n_kicks; ++n) {
    const double previous = moving_average(n - 1);
    const double current = moving_average(n);
    if (std::abs(current - previous) < 0.02 * std::abs(previous)) {
      series.saturation_kick = n;
      break;
    }
  }
  return series;
}

}  // namespace qkr
