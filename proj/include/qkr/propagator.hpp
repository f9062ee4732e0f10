// Split-operator Floquet propagation of the kicked rotor in a moving lattice.
//
// One period: kick exp(-i*(K/hbar_eff)*cos(theta - phi_n)) in position space,
// then free drift exp(-i*hbar_eff*q^2/2) in momentum space. The lattice phase
// at kick n is phi_n = 2*pi*alpha*T*(n-1).
#pragma once

#include "qkr/wave_function.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace qkr {

struct SimParams {
  double K = 5.0;
  double hbar_eff = 4.6;
  double t_kick = 24.3e-6;  // s
  double alpha = 0.0;       // Hz
  double p0 = 0.0;          // native units
  double sigma_w = 4.0 * std::numbers::pi;
  int n_kicks = 0;
  double pulse_width = 0.0;  // s, 0 = delta kick
  int substeps = 1;

  /// K >= 5: classically chaotic standard map.
  bool chaotic_regime() const { return K >= 5.0; }

  void validate() const {
    if (!(K >= 0.0)) throw std::invalid_argument("K must be non-negative");
    if (!(hbar_eff > 0.0)) throw std::invalid_argument("hbar_eff must be positive");
    if (!(t_kick > 0.0)) throw std::invalid_argument("t_kick must be positive");
    if (n_kicks < 0) throw std::invalid_argument("n_kicks must be non-negative");
    if (substeps < 1) throw std::invalid_argument("substeps must be at least 1");
    if (pulse_width < 0.0) throw std::invalid_argument("pulse_width must be non-negative");
    if (pulse_width >= t_kick) throw std::invalid_argument("pulse_width must be shorter than t_kick");
    if (pulse_width > 0.0 && substeps < 2) {
      throw std::invalid_argument("finite pulses need at least 2 substeps");
    }
  }
};

struct KickPhase {
  double phi_n = 0.0;
};

/// Lattice phase at kick n (n >= 1). Not reduced modulo 2*pi.
inline KickPhase kick_phase(int n, double alpha, double t_kick) {
  if (n < 1) throw std::invalid_argument("kick index must be >= 1");
  return {2.0 * std::numbers::pi * alpha * t_kick * double(n - 1)};
}

template <typename Scalar>
void apply_kick(WaveFunction<Scalar>& psi, Scalar K, Scalar hbar_eff, Scalar phi) {
  const Scalar kappa = K / hbar_eff;
  psi.amplitudes.array() *= (psi.grid->theta.array() - phi).cos().unaryExpr([kappa](Scalar c) {
    return std::polar(Scalar(1), -kappa * c);
  });
}

namespace detail {

template <typename Scalar>
ComplexVector<Scalar> free_phases(const Grid<Scalar>& grid, Scalar hbar_eff, Scalar fraction) {
  const Scalar scale = -hbar_eff * fraction / Scalar(2);
  return grid.q_fft.unaryExpr([scale](Scalar q) { return std::polar(Scalar(1), scale * q * q); });
}

template <typename Scalar>
void multiply_in_momentum(WaveFunction<Scalar>& psi, const ComplexVector<Scalar>& diagonal,
                          Eigen::FFT<Scalar>& fft, ComplexVector<Scalar>& workspace) {
  fft.fwd(workspace, psi.amplitudes);
  workspace.array() *= diagonal.array();
  fft.inv(psi.amplitudes, workspace);
}

}  // namespace detail

template <typename Scalar>
void apply_free(WaveFunction<Scalar>& psi, Scalar hbar_eff, Eigen::FFT<Scalar>& fft) {
  ComplexVector<Scalar> workspace(psi.amplitudes.size());
  detail::multiply_in_momentum(psi, detail::free_phases(*psi.grid, hbar_eff, Scalar(1)), fft,
                               workspace);
}

template <typename Scalar>
void apply_free(WaveFunction<Scalar>& psi, Scalar hbar_eff) {
  Eigen::FFT<Scalar> fft;
  apply_free(psi, hbar_eff, fft);
}

/// Square pulse of duration pulse_width replacing the delta kick. Integrated
/// with Strang splitting over `substeps` slices; the lattice keeps moving
/// during the pulse. The drift accumulated inside the pulse is undone at the
/// end, so the result is the effective kick operator: identity for K = 0 and
/// apply_kick in the zero-width limit.
template <typename Scalar>
void apply_finite_pulse_kick(WaveFunction<Scalar>& psi, const SimParams& params, Scalar phi,
                             Eigen::FFT<Scalar>& fft) {
  if (!(params.pulse_width > 0.0)) throw std::invalid_argument("finite pulse needs pulse_width > 0");
  if (params.pulse_width >= params.t_kick) {
    throw std::invalid_argument("pulse_width must be shorter than t_kick");
  }
  if (params.substeps < 2) throw std::invalid_argument("finite pulses need at least 2 substeps");

  const int slices = params.substeps;
  const Scalar slice_time = Scalar(params.pulse_width / slices);
  const Scalar slice_fraction = slice_time / Scalar(params.t_kick);
  const auto half_drift =
      detail::free_phases(*psi.grid, Scalar(params.hbar_eff), slice_fraction / Scalar(2));
  ComplexVector<Scalar> workspace(psi.amplitudes.size());
  const Scalar slice_K = Scalar(params.K) / Scalar(slices);
  const Scalar drift_rate = Scalar(2.0 * std::numbers::pi * params.alpha);

  for (int s = 0; s < slices; ++s) {
    const Scalar t_mid = (Scalar(s) + Scalar(0.5)) * slice_time;
    detail::multiply_in_momentum(psi, half_drift, fft, workspace);
    apply_kick(psi, slice_K, Scalar(params.hbar_eff), phi + drift_rate * t_mid);
    detail::multiply_in_momentum(psi, half_drift, fft, workspace);
  }
  const Scalar pulse_fraction = Scalar(params.pulse_width / params.t_kick);
  detail::multiply_in_momentum(
      psi, detail::free_phases(*psi.grid, Scalar(params.hbar_eff), -pulse_fraction), fft, workspace);
}

/// Holds the transform plan and precomputed drift diagonal for one evolution.
/// Not shareable between threads.
template <typename Scalar>
class Propagator {
 public:
  Propagator(std::shared_ptr<const Grid<Scalar>> grid, const SimParams& params)
      : grid_(std::move(grid)), params_(params), workspace_(grid_->n_points) {
    params_.validate();
    drift_ = detail::free_phases(*grid_, Scalar(params_.hbar_eff), Scalar(1));
  }

  const SimParams& params() const { return params_; }
  const Grid<Scalar>& grid() const { return *grid_; }

  /// psi(nT) = U_n psi((n-1)T): kick with phase phi_n, then drift.
  void step(WaveFunction<Scalar>& psi, int n) {
    const Scalar phi = Scalar(kick_phase(n, params_.alpha, params_.t_kick).phi_n);
    if (params_.pulse_width > 0.0) {
      apply_finite_pulse_kick(psi, params_, phi, fft_);
    } else {
      apply_kick(psi, Scalar(params_.K), Scalar(params_.hbar_eff), phi);
    }
    detail::multiply_in_momentum(psi, drift_, fft_, workspace_);
  }

  /// Snapshots after each kick count in `record_at` (sorted, 0 = initial).
  std::vector<WaveFunction<Scalar>> evolve(WaveFunction<Scalar> psi, std::span<const int> record_at) {
    if (!std::is_sorted(record_at.begin(), record_at.end())) {
      throw std::invalid_argument("record_at must be sorted");
    }
    if (!record_at.empty() && (record_at.front() < 0 || record_at.back() > params_.n_kicks)) {
      throw std::invalid_argument("record_at entries must lie in [0, n_kicks]");
    }
    std::vector<WaveFunction<Scalar>> snapshots;
    snapshots.reserve(record_at.size());
    auto next = record_at.begin();
    for (int n = 0;; ++n) {
      if (n > 0) step(psi, n);
      while (next != record_at.end() && *next == n) {
        snapshots.push_back(psi);
        ++next;
      }
      if (next == record_at.end() || n == params_.n_kicks) break;
    }
    return snapshots;
  }

  Eigen::FFT<Scalar>& fft() { return fft_; }

 private:
  std::shared_ptr<const Grid<Scalar>> grid_;
  SimParams params_;
  Eigen::FFT<Scalar> fft_;
  ComplexVector<Scalar> drift_;
  ComplexVector<Scalar> workspace_;
};

template <typename Scalar>
void floquet_step(WaveFunction<Scalar>& psi, const SimParams& params, int n) {
  Propagator<Scalar> propagator(psi.grid, params);
  propagator.step(psi, n);
}

template <typename Scalar>
std::vector<WaveFunction<Scalar>> evolve(const WaveFunction<Scalar>& psi0, const SimParams& params,
                                         std::span<const int> record_at) {
  Propagator<Scalar> propagator(psi0.grid, params);
  return propagator.evolve(psi0, record_at);
}

}  // namespace qkr
