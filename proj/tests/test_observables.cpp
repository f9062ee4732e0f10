#include <doctest.h>

#include "qkr/experiments.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace qkr;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Grid<double>> grid_of(Eigen::Index n_points, Eigen::Index n_cells) {
  return std::make_shared<const Grid<double>>(build_grid<double>(n_points, n_cells));
}

MomentumDistribution synthetic(const Grid<double>& g, auto&& shape, double reference = 0.0) {
  MomentumDistribution d;
  d.q = g.q;
  d.prob = g.q.unaryExpr(shape);
  d.prob /= d.prob.sum();
  d.reference_p = reference;
  return d;
}

}  // namespace

TEST_CASE("momentum_distribution of the initial Gaussian") {
  const auto g = grid_of(2048, 64);
  const auto dist = momentum_distribution(init_coherent_state(g, 4 * kPi, 0.0));
  CHECK(dist.prob.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dist.prob.minCoeff() >= 0.0);
  Eigen::Index peak = 0;
  dist.prob.maxCoeff(&peak);
  CHECK(dist.q(peak) == 0.0);
  // |c(q)|^2 ~ exp(-sigma^2 q^2): ratio of neighbouring bins.
  const double sigma = 4 * kPi;
  const double q1 = dist.q(peak + 1);
  CHECK(dist.prob(peak + 1) / dist.prob(peak) ==
        doctest::Approx(std::exp(-sigma * sigma * q1 * q1)).epsilon(1e-10));
  CHECK(std::abs(mean_momentum(dist)) < 1e-12);
}

TEST_CASE("mean_energy") {
  const auto g = grid_of(2048, 64);
  CHECK(mean_energy(plane_wave(g, 1.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mean_energy(momentum_distribution(plane_wave(g, 1.0))) == doctest::Approx(0.5).epsilon(1e-12));

  // One kick on q = 0: <p^2> = sum m^2 J_m(x)^2 = x^2/2, x = K/hbar_eff.
  for (double K : {1.0, 5.0, 8.0}) {
    auto psi = plane_wave(g, 0.0);
    apply_kick(psi, K, 4.6, 0.0);
    const double x = K / 4.6;
    double bessel_second_moment = 0.0;
    for (int m = 1; m < 60; ++m) bessel_second_moment += 2.0 * m * m * std::pow(std::cyl_bessel_j(m, x), 2);
    CHECK(bessel_second_moment == doctest::Approx(x * x / 2).epsilon(1e-13));
    CHECK(std::abs(2.0 * mean_energy(psi) - bessel_second_moment) < 1e-10);
  }

  // Early diffusive growth from a q = 0 Gaussian.
  SimParams params;
  params.n_kicks = 3;
  const std::vector<int> record{0, 1, 2, 3};
  const auto snaps = evolve(init_coherent_state(g, 4 * kPi, 0.0), params, record);
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    CHECK(mean_energy(snaps[i]) > mean_energy(snaps[i - 1]));
  }
}

TEST_CASE("distribution and operator expectations agree (random states)") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> K(0.0, 8.0);
  std::uniform_real_distribution<double> alpha(-20e3, 20e3);
  std::uniform_real_distribution<double> p0(-2.0, 2.0);
  std::uniform_int_distribution<int> kicks(0, 10);
  const auto g = grid_of(1024, 32);
  Eigen::FFT<double> fft;
  for (int trial = 0; trial < 25; ++trial) {
    SimParams params;
    params.K = K(rng);
    params.alpha = alpha(rng);
    params.n_kicks = kicks(rng);
    const std::vector<int> record{params.n_kicks};
    const auto psi = evolve(init_coherent_state(g, 4 * kPi, p0(rng)), params, record).front();
    const auto dist = momentum_distribution(psi, fft);
    CHECK(std::abs(dist.prob.sum() - 1.0) < 1e-10);
    CHECK(std::abs(mean_momentum(dist) - mean_momentum(psi)) < 1e-10);
    CHECK(std::abs(mean_energy(dist) - mean_energy(psi)) < 1e-10);
  }
}

TEST_CASE("asymmetry") {
  const auto g = build_grid<double>(256, 32);

  SUBCASE("symmetric about the reference is zero") {
    const auto d = synthetic(
        g, [](double q) { return std::abs(q - 1.0) < 2.0 ? std::exp(-std::abs(q - 1.0)) : 0.0; }, 1.0);
    CHECK(std::abs(asymmetry(d)) < 1e-14);
  }

  SUBCASE("all mass above the reference is +1") {
    const auto d = synthetic(g, [](double q) { return q > 0.5 ? 1.0 : 0.0; }, 0.25);
    CHECK(asymmetry(d) == 1.0);
  }

  SUBCASE("the reference bin is excluded") {
    auto d = synthetic(g, [](double q) { return q == 0.0 ? 10.0 : (q == 1.0 ? 1.0 : 0.0); });
    CHECK(asymmetry(d) == 1.0);
  }

  SUBCASE("antisymmetric under reflection about the reference") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> ref_index(64, 192);
    for (int trial = 0; trial < 50; ++trial) {
      MomentumDistribution d;
      d.q = g.q;
      d.prob = Eigen::VectorXd::NullaryExpr(g.n_points, [&] { return u(rng); });
      // Keep support inside the mirrored range so no mass is lost.
      const int r = ref_index(rng);
      d.reference_p = g.q(r);
      const int reach = std::min(r, int(g.n_points) - 1 - r);
      for (Eigen::Index i = 0; i < g.n_points; ++i) {
        if (std::abs(i - r) > reach) d.prob(i) = 0.0;
      }
      d.prob /= d.prob.sum();
      CHECK(asymmetry(reflect(d)) == doctest::Approx(-asymmetry(d)).epsilon(1e-12));
    }
  }

  SUBCASE("an off-grid reference splits the straddled bins") {
    MomentumDistribution d;
    d.q = g.q;
    d.prob = Eigen::VectorXd::Zero(g.n_points);
    d.prob(128) = 0.5;  // q = 0
    d.prob(129) = 0.5;  // q = 1/32
    d.reference_p = 0.25 / 32;
    // Window spans [-1/4, 3/4] grid steps: a quarter of bin 128 lies below it,
    // three quarters of bin 129 above.
    CHECK(asymmetry(d) == doctest::Approx((0.375 - 0.125) / 0.5).epsilon(1e-15));
    d.reference_p = 0.0;
    CHECK(asymmetry(d) == 1.0);
  }

  SUBCASE("mirror property holds for launch velocities between grid points") {
    const PhysicalConstants constants;
    SimParams params;
    params.hbar_eff = constants.hbar_eff_for_period(params.t_kick);
    params.n_kicks = 2;
    const std::vector<int> record{2};
    for (double v : {0.0195, 0.02, 0.3}) {
      SimParams bec = params;
      bec.p0 = v;
      SimParams lattice = params;
      lattice.alpha = velocity_to_alpha(native_to_velocity(v, constants), constants);
      const double a_bec = run_localization(bec, Scenario::moving_bec, record).asymmetry[0];
      const double a_lat = run_localization(lattice, Scenario::moving_lattice, record).asymmetry[0];
      CHECK(std::abs(a_bec + a_lat) < 2e-3);
    }
  }

  SUBCASE("stationary lattice and BEC stay symmetric") {
    const auto grid = grid_of(2048, 64);
    SimParams params;
    params.n_kicks = 20;
    Propagator<double> propagator(grid, params);
    auto psi = init_coherent_state(grid, 4 * kPi, 0.0);
    for (int n = 1; n <= 20; ++n) {
      propagator.step(psi, n);
      CHECK(std::abs(asymmetry(momentum_distribution(psi, propagator.fft()))) < 1e-9);
    }
  }
}

TEST_CASE("coarse_grain keeps whole bins only") {
  const auto g = build_grid<double>(256, 32);
  const auto d = synthetic(g, [](double) { return 1.0; });
  const auto binned = coarse_grain(d, 0.0, 1.0);
  // q in [-4, 4) at spacing 1/32: bins centred at -3..3 are complete; -4 is half.
  CHECK(binned.centre.size() == 7);
  CHECK(binned.centre(0) == -3.0);
  CHECK((binned.prob.array() - 32.0 / 256.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("fit_localization_profile") {
  const auto g = build_grid<double>(2048, 64);

  SUBCASE("recovers an exact exponential") {
    for (double xi : {0.8, 1.5, 2.5}) {
      const auto d = synthetic(g, [xi](double q) { return std::exp(-std::abs(q) / xi); });
      for (Side side : {Side::left, Side::right, Side::both}) {
        const auto fit = fit_localization_profile(d, side);
        CHECK(fit.loc_length == doctest::Approx(xi).epsilon(0.01));
        CHECK(fit.peak_position == 0.0);
        // Half-open bins sit one grid step off-mirror, so the two-sided fit is
        // not exact.
        CHECK(fit.residual < (side == Side::both ? 0.02 : 1e-10));
      }
      // Gaussian shape fits the exponential worse.
      CHECK(fit_gaussian_profile(d, Side::right).residual > 0.1);
    }
  }

  SUBCASE("recovers a Gaussian width with the Gaussian fit") {
    const auto d = synthetic(g, [](double q) { return std::exp(-q * q / (2 * 1.7 * 1.7)); });
    const auto fit = fit_gaussian_profile(d, Side::both);
    CHECK(fit.width == doctest::Approx(1.7).epsilon(0.02));
    CHECK(fit.residual < fit_localization_profile(d, Side::both).residual);
  }

  SUBCASE("too few usable bins is a fit failure") {
    const auto d = synthetic(g, [](double q) { return std::exp(-std::abs(q) / 0.1); });
    CHECK_THROWS_AS(fit_localization_profile(d, Side::right), FitError);
  }

  SUBCASE("symmetric launch gives equal decay lengths") {
    SimParams params;
    params.n_kicks = 50;
    const std::vector<int> record{50};
    const auto run = run_localization(params, Scenario::moving_bec, record);
    const auto left = fit_localization_profile(run.distributions[0], Side::left);
    const auto right = fit_localization_profile(run.distributions[0], Side::right);
    CHECK(left.loc_length == doctest::Approx(right.loc_length).epsilon(0.05));
  }

  SUBCASE("moving lattice gives unequal decay lengths, mirrored by a moving BEC") {
    const PhysicalConstants constants;
    SimParams params;
    params.hbar_eff = constants.hbar_eff_for_period(params.t_kick);
    params.n_kicks = 50;
    const std::vector<int> record{50};
    SimParams lattice = params;
    lattice.alpha = velocity_to_alpha(native_to_velocity(1.0, constants), constants);
    const auto moving_lattice = run_localization(lattice, Scenario::moving_lattice, record);
    SimParams bec = params;
    bec.p0 = 1.0;
    const auto moving_bec = run_localization(bec, Scenario::moving_bec, record);

    const auto ll = fit_localization_profile(moving_lattice.distributions[0], Side::left);
    const auto lr = fit_localization_profile(moving_lattice.distributions[0], Side::right);
    const auto bl = fit_localization_profile(moving_bec.distributions[0], Side::left);
    const auto br = fit_localization_profile(moving_bec.distributions[0], Side::right);
    CHECK(std::abs(ll.loc_length - lr.loc_length) > 0.02 * ll.loc_length);
    CHECK(ll.loc_length == doctest::Approx(br.loc_length).epsilon(1e-3));
    CHECK(lr.loc_length == doctest::Approx(bl.loc_length).epsilon(1e-3));
  }
}
