#include <doctest.h>

#include "qkr/units.hpp"

#include <cmath>
#include <numbers>

using namespace qkr;

namespace {
// Independent arithmetic for 87Rb at 780 nm (CODATA 2018 hbar, 86.909180527 u).
constexpr double kHbar = 1.054571817e-34;
constexpr double kMass = 86.909180527 * 1.66053906660e-27;
constexpr double kLambda = 780e-9;
const double kK = 2.0 * std::numbers::pi / kLambda;
const double kVr = kHbar * kK / kMass;  // 5.88636e-3 m/s
}  // namespace

TEST_CASE("constants: derived fields follow from hbar, mass, lambda") {
  const PhysicalConstants c;
  CHECK(c.k_wave() == doctest::Approx(kK).epsilon(1e-15));
  CHECK(c.v_recoil() == doctest::Approx(kVr).epsilon(1e-9));
  CHECK(c.v_recoil() == doctest::Approx(5.88636e-3).epsilon(1e-5));
  CHECK(c.omega_recoil() == doctest::Approx(kHbar * kK * kK / (2.0 * kMass)).epsilon(1e-9));
  CHECK(c.v_recoil() == c.hbar() * c.k_wave() / c.mass());

  CHECK_THROWS_AS(PhysicalConstants(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PhysicalConstants(1.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("alpha_to_lattice_velocity") {
  const PhysicalConstants c;
  CHECK(alpha_to_lattice_velocity(0.0, c) == 0.0);
  // lambda*alpha/2 at 15 kHz.
  CHECK(alpha_to_lattice_velocity(15e3, c) == doctest::Approx(780e-9 * 15e3 / 2).epsilon(1e-14));
  CHECK(alpha_to_lattice_velocity(15e3, c) == doctest::Approx(5.85e-3).epsilon(1e-12));
  // The nominal 15 kHz-per-recoil calibration holds to within 1%.
  CHECK(alpha_to_lattice_velocity(15e3, c) / c.v_recoil() == doctest::Approx(1.0).epsilon(0.01));
  // Odd and linear.
  CHECK(alpha_to_lattice_velocity(-2.5e3, c) == -alpha_to_lattice_velocity(2.5e3, c));
  CHECK(alpha_to_lattice_velocity(3e3, c) == doctest::Approx(3.0 * alpha_to_lattice_velocity(1e3, c)));
}

TEST_CASE("velocity_to_alpha round trip") {
  const PhysicalConstants c;
  CHECK(velocity_to_alpha(0.0, c) == 0.0);
  CHECK(velocity_to_alpha(c.v_recoil(), c) == doctest::Approx(15e3).epsilon(0.01));
  CHECK(recoil_frequency_difference(c) == doctest::Approx(2.0 * kVr / kLambda).epsilon(1e-9));

  const double a230 = velocity_to_alpha(230e-6, c);
  CHECK(a230 == doctest::Approx(2.0 * 230e-6 / 780e-9).epsilon(1e-14));
  CHECK(a230 == doctest::Approx(586.0).epsilon(0.01));
  CHECK(alpha_to_lattice_velocity(a230, c) == doctest::Approx(230e-6).epsilon(1e-14));

  for (double alpha : {-75e3, -3e3, -100.0, 1e-3, 250.0, 15e3, 75e3}) {
    const double back = velocity_to_alpha(alpha_to_lattice_velocity(alpha, c), c);
    CHECK(std::abs(back - alpha) / std::abs(alpha) < 1e-14);
  }
}

TEST_CASE("momentum_units") {
  const PhysicalConstants c;
  const auto zero = momentum_units(0.0, c);
  CHECK(zero.native == 0.0);
  CHECK(zero.hbar_k == 0.0);
  CHECK(zero.um_per_s == 0.0);

  CHECK(momentum_units(1.0, c).hbar_k == 2.0);
  const auto micro = momentum_units(0.0195, c);
  CHECK(micro.hbar_k == doctest::Approx(0.039));
  CHECK(micro.um_per_s == doctest::Approx(0.039 * kVr * 1e6).epsilon(1e-9));
  CHECK(micro.um_per_s == doctest::Approx(230.0).epsilon(0.005));
  CHECK(velocity_to_native(native_to_velocity(0.37, c), c) == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("lattice config: hbar_eff from the kick period") {
  const PhysicalConstants c;
  const double h = c.hbar_eff_for_period(24.3e-6);
  CHECK(h >= 4.58);
  CHECK(h <= 4.63);
  CHECK(h == doctest::Approx(8.0 * c.omega_recoil() * 24.3e-6));

  const LatticeConfig derived(c, 24.3e-6, 0.0);
  CHECK(derived.hbar_eff_derived());
  CHECK(derived.hbar_eff() == h);

  const LatticeConfig given(c, 24.3e-6, 100.0, 4.6);
  CHECK_FALSE(given.hbar_eff_derived());
  CHECK(given.hbar_eff() == 4.6);

  CHECK_THROWS_AS(LatticeConfig(c, 24.3e-6, 0.0, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(LatticeConfig(c, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("recoil calibration check") {
  const PhysicalConstants c;
  CHECK_NOTHROW(check_recoil_calibration(c));
  // lambda*alpha/2 and hbar*k/M differ by 0.6% at 15 kHz.
  CHECK_THROWS(check_recoil_calibration(c, 0.001));
  CHECK_THROWS(check_recoil_calibration(PhysicalConstants(kHbar, kMass, 1064e-9)));
}
