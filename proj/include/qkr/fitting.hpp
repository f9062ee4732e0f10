// Least-squares helpers shared by the observables and experiment layers.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace qkr {

/// Ordinary least squares y = intercept + slope*x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (intercept, slope)
  double residual_sigma = 0.0;                            // sqrt(SSR / (n-2))
  double residual_rms = 0.0;                              // sqrt(SSR / n)
  double x_mean = 0.0;
  double sxx = 0.0;
  Eigen::Index n = 0;

  double operator()(double x) const { return intercept + slope * x; }

  /// x where the line crosses zero.
  double root() const { return -intercept / slope; }

  /// Standard error of root() by the delta method:
  /// sigma/|slope| * sqrt(1/n + (x0 - x_mean)^2 / Sxx).
  double root_sigma() const {
    const double x0 = root();
    return residual_sigma / std::abs(slope) *
           std::sqrt(1.0 / double(n) + (x0 - x_mean) * (x0 - x_mean) / sxx);
  }
};

inline LinearFit fit_line(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("fit_line: need at least 3 points");

  LinearFit fit;
  fit.n = x.size();
  fit.x_mean = x.mean();
  const Eigen::VectorXd dx = x.array() - fit.x_mean;
  fit.sxx = dx.squaredNorm();
  if (!(fit.sxx > 0.0)) throw std::invalid_argument("fit_line: x values are all equal");
  fit.slope = dx.dot(y) / fit.sxx;
  fit.intercept = y.mean() - fit.slope * fit.x_mean;

  const Eigen::VectorXd residual = y.array() - fit.intercept - fit.slope * x.array();
  const double ssr = residual.squaredNorm();
  fit.residual_rms = std::sqrt(ssr / double(fit.n));
  fit.residual_sigma = std::sqrt(ssr / double(fit.n - 2));

  const double s2 = fit.residual_sigma * fit.residual_sigma;
  const double var_slope = s2 / fit.sxx;
  fit.covariance(1, 1) = var_slope;
  fit.covariance(0, 0) = s2 / double(fit.n) + fit.x_mean * fit.x_mean * var_slope;
  fit.covariance(0, 1) = fit.covariance(1, 0) = -fit.x_mean * var_slope;
  return fit;
}

}  // namespace qkr
