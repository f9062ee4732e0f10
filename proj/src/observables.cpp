#include "qkr/observables.hpp"

#include <cmath>
#include <map>

namespace qkr {

MomentumDistribution reflect(const MomentumDistribution& dist) {
  MomentumDistribution out = dist;
  out.prob.setZero();
  const double dq = dist.dq();
  const double q0 = dist.q(0);
  for (Eigen::Index i = 0; i < dist.q.size(); ++i) {
    const double mirrored = 2.0 * dist.reference_p - dist.q(i);
    const auto j = static_cast<Eigen::Index>(std::llround((mirrored - q0) / dq));
    if (j >= 0 && j < dist.q.size()) out.prob(j) = dist.prob(i);
  }
  return out;
}

BinnedProfile coarse_grain(const MomentumDistribution& dist, double centre, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin_width must be positive");
  const double dq = dist.dq();
  const auto full = static_cast<long>(std::llround(bin_width / dq));

  std::map<long, std::pair<double, long>> bins;  // index -> (sum, count)
  for (Eigen::Index i = 0; i < dist.q.size(); ++i) {
    const long m = static_cast<long>(std::floor((dist.q(i) - centre) / bin_width + 0.5 + 1e-12));
    auto& [sum, count] = bins[m];
    sum += dist.prob(i);
    ++count;
  }

  BinnedProfile profile;
  std::vector<std::pair<double, double>> kept;
  for (const auto& [m, entry] : bins) {
    if (entry.second < full) continue;  // partial bin at the grid edge
    kept.emplace_back(centre + double(m) * bin_width, entry.first);
  }
  profile.centre.resize(Eigen::Index(kept.size()));
  profile.prob.resize(Eigen::Index(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    profile.centre(Eigen::Index(i)) = kept[i].first;
    profile.prob(Eigen::Index(i)) = kept[i].second;
  }
  return profile;
}

namespace {

struct TailSample {
  Eigen::VectorXd offset;  // signed distance from the peak
  Eigen::VectorXd log_prob;
  double peak = 0.0;
};

TailSample select_tail(const MomentumDistribution& dist, Side side, const ProfileFitOptions& options) {
  Eigen::Index imax = 0;
  dist.prob.maxCoeff(&imax);
  const double peak = dist.q(imax);
  const BinnedProfile profile = coarse_grain(dist, peak, options.bin_width);
  const double peak_prob = profile.prob.maxCoeff();

  std::vector<double> offsets;
  std::vector<double> logs;
  for (Eigen::Index i = 0; i < profile.centre.size(); ++i) {
    const double offset = profile.centre(i) - peak;
    if (std::abs(offset) < 0.5 * options.bin_width) continue;
    if (side == Side::left && offset > 0.0) continue;
    if (side == Side::right && offset < 0.0) continue;
    const double rel = profile.prob(i) / peak_prob;
    if (rel < options.lower || rel > options.upper) continue;
    offsets.push_back(offset);
    logs.push_back(std::log(profile.prob(i)));
  }
  if (Eigen::Index(offsets.size()) < options.min_bins) {
    throw FitError("profile fit: only " + std::to_string(offsets.size()) +
                   " usable tail bins (need " + std::to_string(options.min_bins) + ")");
  }
  TailSample tail;
  tail.offset = Eigen::Map<const Eigen::VectorXd>(offsets.data(), Eigen::Index(offsets.size()));
  tail.log_prob = Eigen::Map<const Eigen::VectorXd>(logs.data(), Eigen::Index(logs.size()));
  tail.peak = peak;
  return tail;
}

}  // namespace

LocalizationFit fit_localization_profile(const MomentumDistribution& dist, Side side,
                                         const ProfileFitOptions& options) {
  const TailSample tail = select_tail(dist, side, options);
  const LinearFit line = fit_line(tail.offset.cwiseAbs(), tail.log_prob);
  if (!(line.slope < 0.0)) throw FitError("profile fit: tail is not decaying");
  LocalizationFit fit;
  fit.loc_length = -1.0 / line.slope;
  fit.peak_position = tail.peak;
  fit.residual = line.residual_rms;
  fit.side = side;
  fit.n_bins = line.n;
  return fit;
}

GaussianProfileFit fit_gaussian_profile(const MomentumDistribution& dist, Side side,
                                        const ProfileFitOptions& options) {
  const TailSample tail = select_tail(dist, side, options);
  const LinearFit line = fit_line(tail.offset.cwiseAbs2(), tail.log_prob);
  if (!(line.slope < 0.0)) throw FitError("profile fit: tail is not decaying");
  GaussianProfileFit fit;
  fit.width = std::sqrt(-0.5 / line.slope);
  fit.residual = line.residual_rms;
  fit.side = side;
  fit.n_bins = line.n;
  return fit;
}

}  // namespace qkr
