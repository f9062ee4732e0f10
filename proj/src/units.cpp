#include "qkr/units.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qkr {

namespace {
constexpr double kNominalRecoilFrequency = 15.0e3;  // Hz per single-photon recoil velocity
}

PhysicalConstants::PhysicalConstants(double hbar, double mass, double lambda)
    : hbar_(hbar), mass_(mass), lambda_(lambda) {
  if (!(hbar > 0.0) || !(mass > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("physical constants must be strictly positive");
  }
  k_wave_ = 2.0 * std::numbers::pi / lambda_;
  v_recoil_ = hbar_ * k_wave_ / mass_;
  omega_recoil_ = hbar_ * k_wave_ * k_wave_ / (2.0 * mass_);
}

LatticeConfig::LatticeConfig(const PhysicalConstants& constants, double t_kick, double alpha,
                             std::optional<double> hbar_eff)
    : t_kick_(t_kick), alpha_(alpha), derived_(!hbar_eff.has_value()) {
  if (!(t_kick > 0.0)) throw std::invalid_argument("kick period must be positive");
  const double expected = constants.hbar_eff_for_period(t_kick);
  if (hbar_eff) {
    if (!(*hbar_eff > 0.0)) throw std::invalid_argument("hbar_eff must be positive");
    if (std::abs(*hbar_eff - expected) > kHbarEffTolerance * expected) {
      throw std::invalid_argument("hbar_eff " + std::to_string(*hbar_eff) +
                                  " inconsistent with kick period (8*omega_r*T = " +
                                  std::to_string(expected) + ")");
    }
    hbar_eff_ = *hbar_eff;
  } else {
    hbar_eff_ = expected;
  }
}

double alpha_to_lattice_velocity(double alpha, const PhysicalConstants& constants) {
  return 0.5 * constants.lambda() * alpha;
}

double velocity_to_alpha(double velocity, const PhysicalConstants& constants) {
  return 2.0 * velocity / constants.lambda();
}

double native_to_velocity(double p_native, const PhysicalConstants& constants) {
  return 2.0 * constants.v_recoil() * p_native;
}

double velocity_to_native(double velocity, const PhysicalConstants& constants) {
  return velocity / (2.0 * constants.v_recoil());
}

MomentumUnits momentum_units(double p_native, const PhysicalConstants& constants) {
  const double si = native_to_velocity(p_native, constants);
  return {p_native, 2.0 * p_native, si, si * 1.0e6};
}

double recoil_frequency_difference(const PhysicalConstants& constants) {
  return velocity_to_alpha(constants.v_recoil(), constants);
}

void check_recoil_calibration(const PhysicalConstants& constants, double tolerance) {
  const double exact = recoil_frequency_difference(constants);
  const double rel = std::abs(exact - kNominalRecoilFrequency) / exact;
  if (rel > tolerance) {
    throw std::runtime_error("recoil calibration mismatch: lambda*alpha/2 = v_recoil needs alpha = " +
                             std::to_string(exact) + " Hz, nominal 15 kHz");
  }
}

}  // namespace qkr
