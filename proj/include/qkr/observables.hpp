// Measurable quantities of a kicked-rotor state.
#pragma once

#include "qkr/fitting.hpp"
#include "qkr/wave_function.hpp"

#include <algorithm>
#include <vector>

namespace qkr {

/// Probabilities on the native momentum axis (ascending q).
struct MomentumDistribution {
  Eigen::VectorXd q;
  Eigen::VectorXd prob;
  double reference_p = 0.0;

  double dq() const { return q.size() > 1 ? q(1) - q(0) : 1.0; }
};

template <typename Scalar>
MomentumDistribution momentum_distribution(const WaveFunction<Scalar>& psi, Eigen::FFT<Scalar>& fft,
                                           double reference_p = 0.0) {
  const auto spectrum = momentum_amplitudes(psi, fft);
  const auto& g = *psi.grid;
  MomentumDistribution dist;
  dist.q = g.q.template cast<double>();
  dist.prob.resize(g.n_points);
  for (Eigen::Index k = 0; k < g.n_points; ++k) {
    dist.prob(g.sorted_index(k)) = double(std::norm(spectrum(k)));
  }
  dist.reference_p = reference_p;
  return dist;
}

template <typename Scalar>
MomentumDistribution momentum_distribution(const WaveFunction<Scalar>& psi, double reference_p = 0.0) {
  Eigen::FFT<Scalar> fft;
  return momentum_distribution(psi, fft, reference_p);
}

inline double mean_momentum(const MomentumDistribution& dist) { return dist.q.dot(dist.prob); }

/// <p^2>/2 in native units.
inline double mean_energy(const MomentumDistribution& dist) {
  return 0.5 * dist.q.cwiseAbs2().dot(dist.prob);
}

namespace detail {

/// <psi| f(p) |psi> with f(p) applied spectrally, evaluated as a position-space
/// inner product.
template <typename Scalar, typename Fn>
double momentum_operator_expectation(const WaveFunction<Scalar>& psi, Fn&& f) {
  Eigen::FFT<Scalar> fft;
  ComplexVector<Scalar> spectrum(psi.amplitudes.size());
  fft.fwd(spectrum, psi.amplitudes);
  spectrum.array() *= psi.grid->q_fft.unaryExpr(f).array().template cast<std::complex<Scalar>>();
  ComplexVector<Scalar> applied(psi.amplitudes.size());
  fft.inv(applied, spectrum);
  return double(std::real(psi.amplitudes.dot(applied)) * psi.grid->dtheta());
}

}  // namespace detail

/// <psi|p|psi> evaluated as an operator expectation on the grid.
template <typename Scalar>
double mean_momentum(const WaveFunction<Scalar>& psi) {
  return detail::momentum_operator_expectation(psi, [](Scalar q) { return q; });
}

template <typename Scalar>
double mean_energy(const WaveFunction<Scalar>& psi) {
  return 0.5 * detail::momentum_operator_expectation(psi, [](Scalar q) { return q * q; });
}

/// (P(q > ref) - P(q < ref)) / P(q != ref), excluding a window one grid step
/// wide centred on the reference. Each bin covers [q - dq/2, q + dq/2) and is
/// split linearly where the window cuts it, so an off-grid reference (a launch
/// momentum between grid points) is treated the same as an on-grid one.
inline double asymmetry(const MomentumDistribution& dist) {
  const double dq = dist.dq();
  double above = 0.0;
  double below = 0.0;
  for (Eigen::Index i = 0; i < dist.q.size(); ++i) {
    const double offset = dist.q(i) - dist.reference_p;
    above += std::clamp(offset / dq, 0.0, 1.0) * dist.prob(i);
    below += std::clamp(-offset / dq, 0.0, 1.0) * dist.prob(i);
  }
  const double total = above + below;
  return total > 0.0 ? (above - below) / total : 0.0;
}

/// Distribution mirrored about its reference momentum (same grid, reindexed).
/// Requires the reference to sit on a grid point or halfway between two.
MomentumDistribution reflect(const MomentumDistribution& dist);

enum class Side { left, right, both };

struct ProfileFitOptions {
  double lower = 1e-6;      // relative to the peak bin
  double upper = 1e-1;
  double bin_width = 1.0;   // native units; kicks couple q in integer steps
  Eigen::Index min_bins = 5;
};

/// Unit-width bins centred on `centre`: centres and summed probabilities.
struct BinnedProfile {
  Eigen::VectorXd centre;
  Eigen::VectorXd prob;
};

BinnedProfile coarse_grain(const MomentumDistribution& dist, double centre, double bin_width);

/// Exponential tail fit prob ~ exp(-|q - peak| / loc_length).
struct LocalizationFit {
  double loc_length = 0.0;
  double peak_position = 0.0;
  double residual = 0.0;  // RMS of ln(prob) residuals
  Side side = Side::both;
  Eigen::Index n_bins = 0;
};

/// Gaussian tail fit prob ~ exp(-(q - peak)^2 / (2 width^2)) on the same bins,
/// for comparing profile shapes.
struct GaussianProfileFit {
  double width = 0.0;
  double residual = 0.0;
  Side side = Side::both;
  Eigen::Index n_bins = 0;
};

LocalizationFit fit_localization_profile(const MomentumDistribution& dist, Side side,
                                         const ProfileFitOptions& options = {});

GaussianProfileFit fit_gaussian_profile(const MomentumDistribution& dist, Side side,
                                        const ProfileFitOptions& options = {});

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qkr
