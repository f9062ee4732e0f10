#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qkr {

template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Periodic position grid theta in [0, 2*pi*n_cells) and its conjugate
/// momentum axis q_m = m / n_cells, m in [-n_points/2, n_points/2).
///
/// `q` is sorted ascending; `q_fft` holds the same values in the order of
/// a forward DFT of the position samples (m = 0, 1, ..., -1).
template <typename Scalar>
struct Grid {
  Eigen::Index n_points = 0;
  Eigen::Index n_cells = 0;
  RealVector<Scalar> theta;
  RealVector<Scalar> q;
  RealVector<Scalar> q_fft;

  Scalar length() const { return Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(n_cells); }
  Scalar dtheta() const { return length() / Scalar(n_points); }
  Scalar dq() const { return Scalar(1) / Scalar(n_cells); }
  Scalar q_max() const { return q(n_points - 1); }
  Scalar midpoint() const { return Scalar(0.5) * length(); }

  /// Index into `q` (ascending) of the DFT bin `k`.
  Eigen::Index sorted_index(Eigen::Index k) const {
    return k < n_points / 2 ? k + n_points / 2 : k - n_points / 2;
  }
};

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

template <typename Scalar = double>
Grid<Scalar> build_grid(Eigen::Index n_points, Eigen::Index n_cells) {
  if (!is_power_of_two(n_points)) {
    throw std::invalid_argument("n_points must be a power of two, got " + std::to_string(n_points));
  }
  if (n_cells < 1) throw std::invalid_argument("n_cells must be at least 1");
  if (n_points < 8 * n_cells) {
    throw std::invalid_argument("insufficient resolution: need at least 8 points per lattice period");
  }

  Grid<Scalar> grid;
  grid.n_points = n_points;
  grid.n_cells = n_cells;
  const Scalar dtheta = grid.dtheta();
  grid.theta = RealVector<Scalar>::LinSpaced(n_points, Scalar(0), Scalar(n_points - 1)) * dtheta;

  const Eigen::Index half = n_points / 2;
  grid.q.resize(n_points);
  grid.q_fft.resize(n_points);
  for (Eigen::Index i = 0; i < n_points; ++i) {
    grid.q(i) = Scalar(i - half) / Scalar(n_cells);
    const Eigen::Index m = i < half ? i : i - n_points;
    grid.q_fft(i) = Scalar(m) / Scalar(n_cells);
  }
  return grid;
}

}  // namespace qkr
