#pragma once

#include "qkr/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <memory>

namespace qkr {

/// Complex amplitudes on a periodic grid, normalized so that
/// sum_j |psi_j|^2 * dtheta = 1.
template <typename Scalar>
struct WaveFunction {
  std::shared_ptr<const Grid<Scalar>> grid;
  ComplexVector<Scalar> amplitudes;

  Scalar norm() const { return amplitudes.squaredNorm() * grid->dtheta(); }

  void normalize() { amplitudes /= std::sqrt(norm()); }
};

/// Momentum amplitudes c_m in DFT order, scaled so sum |c_m|^2 = norm().
template <typename Scalar>
ComplexVector<Scalar> momentum_amplitudes(const WaveFunction<Scalar>& psi, Eigen::FFT<Scalar>& fft) {
  ComplexVector<Scalar> spectrum(psi.amplitudes.size());
  fft.fwd(spectrum, psi.amplitudes);
  const auto& g = *psi.grid;
  spectrum *= std::sqrt(g.dtheta() / Scalar(g.n_points));
  return spectrum;
}

/// Inverse of momentum_amplitudes: overwrites psi's position amplitudes.
template <typename Scalar>
void set_from_momentum(WaveFunction<Scalar>& psi, const ComplexVector<Scalar>& spectrum,
                       Eigen::FFT<Scalar>& fft) {
  fft.inv(psi.amplitudes, spectrum);
  const auto& g = *psi.grid;
  psi.amplitudes *= std::sqrt(Scalar(g.n_points) / g.dtheta());
}

/// Gaussian of width sigma_w (theta units) centred at the domain midpoint,
/// carrying mean momentum +p0 (native units).
template <typename Scalar>
WaveFunction<Scalar> init_coherent_state(std::shared_ptr<const Grid<Scalar>> grid, Scalar sigma_w,
                                         Scalar p0) {
  if (!(sigma_w > Scalar(0))) throw std::invalid_argument("sigma_w must be positive");
  if (Scalar(2) * sigma_w / grid->dtheta() < Scalar(8)) {
    throw std::invalid_argument("sigma_w too small: fewer than 8 grid points within +/- sigma");
  }
  if (sigma_w > grid->length() / Scalar(8)) {
    throw std::invalid_argument("sigma_w must be small compared to the domain length");
  }
  if (!(std::abs(p0) < grid->q_max() / Scalar(2))) {
    throw std::invalid_argument("p0 outside the momentum grid");
  }

  const Scalar centre = grid->midpoint();
  WaveFunction<Scalar> psi{grid, ComplexVector<Scalar>(grid->n_points)};
  for (Eigen::Index j = 0; j < grid->n_points; ++j) {
    const Scalar x = grid->theta(j) - centre;
    psi.amplitudes(j) = std::exp(-x * x / (Scalar(2) * sigma_w * sigma_w)) *
                        std::polar(Scalar(1), p0 * x);
  }
  psi.normalize();
  return psi;
}

/// Plane wave exp(i*q*theta) for a q on the momentum axis.
template <typename Scalar>
WaveFunction<Scalar> plane_wave(std::shared_ptr<const Grid<Scalar>> grid, Scalar q) {
  WaveFunction<Scalar> psi{grid, ComplexVector<Scalar>(grid->n_points)};
  for (Eigen::Index j = 0; j < grid->n_points; ++j) {
    psi.amplitudes(j) = std::polar(Scalar(1), q * grid->theta(j));
  }
  psi.normalize();
  return psi;
}

}  // namespace qkr
