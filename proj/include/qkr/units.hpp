// Physical constants for 87Rb in a 780 nm standing wave, and the conversions
// between laboratory units (Hz, m/s, s) and the dimensionless propagator units.
//
// Native momentum unit: one two-photon recoil, 2*hbar*k. Native position:
// theta = 2*k*x, so one lattice period spans 2*pi.
#pragma once

#include <optional>
#include <stdexcept>

namespace qkr {

class PhysicalConstants {
 public:
  static constexpr double kCodataHbar = 1.054571817e-34;       // J s
  static constexpr double kRubidium87Mass = 1.4431608951e-25;  // kg (86.909180527 u)
  static constexpr double kLatticeWavelength = 780.0e-9;       // m

  /// Defaults to 87Rb and a 780 nm lattice.
  PhysicalConstants() : PhysicalConstants(kCodataHbar, kRubidium87Mass, kLatticeWavelength) {}
  PhysicalConstants(double hbar, double mass, double lambda);

  double hbar() const { return hbar_; }
  double mass() const { return mass_; }
  double lambda() const { return lambda_; }
  double k_wave() const { return k_wave_; }
  /// Single-photon recoil velocity hbar*k/M.
  double v_recoil() const { return v_recoil_; }
  /// Recoil angular frequency hbar*k^2/(2M).
  double omega_recoil() const { return omega_recoil_; }

  /// Effective Planck constant 8*omega_r*T for kick period T (s).
  double hbar_eff_for_period(double t_kick) const { return 8.0 * omega_recoil_ * t_kick; }

 private:
  double hbar_;
  double mass_;
  double lambda_;
  double k_wave_;
  double v_recoil_;
  double omega_recoil_;
};

/// Kick period, beam frequency difference and effective Planck constant.
/// When hbar_eff is not given it is derived from the period.
class LatticeConfig {
 public:
  static constexpr double kHbarEffTolerance = 0.005;

  LatticeConfig(const PhysicalConstants& constants, double t_kick, double alpha,
                std::optional<double> hbar_eff = std::nullopt);

  double t_kick() const { return t_kick_; }
  double alpha() const { return alpha_; }
  double hbar_eff() const { return hbar_eff_; }
  bool hbar_eff_derived() const { return derived_; }

 private:
  double t_kick_;
  double alpha_;
  double hbar_eff_;
  bool derived_;
};

/// v = lambda*alpha/2. Sign of alpha gives the direction.
double alpha_to_lattice_velocity(double alpha, const PhysicalConstants& constants);
double velocity_to_alpha(double velocity, const PhysicalConstants& constants);

/// Velocity (m/s) of a native momentum value and its inverse.
double native_to_velocity(double p_native, const PhysicalConstants& constants);
double velocity_to_native(double velocity, const PhysicalConstants& constants);

struct MomentumUnits {
  double native;   // 2 hbar k
  double hbar_k;   // single-photon recoils
  double m_per_s;
  double um_per_s;
};

MomentumUnits momentum_units(double p_native, const PhysicalConstants& constants);

/// Frequency difference that moves the lattice at exactly one recoil
/// velocity. Nominally 15 kHz for 87Rb at 780 nm.
double recoil_frequency_difference(const PhysicalConstants& constants);

/// Throws if the nominal 15 kHz-per-recoil calibration disagrees with
/// lambda*alpha/2 = hbar*k/M by more than `tolerance` (relative).
void check_recoil_calibration(const PhysicalConstants& constants, double tolerance = 0.01);

}  // namespace qkr
