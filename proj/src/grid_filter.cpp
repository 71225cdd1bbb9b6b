#include "btm/grid_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btm/errors.hpp"

namespace btm {

GridDensity GridDensity::uniform(std::size_t points) {
  if (points < 2) throw InvalidConfig("grid needs at least two points");
  return GridDensity(std::vector<double>(points, 1.0 / static_cast<double>(points)));
}

GridDensity GridDensity::point_mass(std::size_t points, double at) {
  if (points < 2) throw InvalidConfig("grid needs at least two points");
  std::vector<double> m(points, 0.0);
  const auto j = static_cast<std::size_t>(
      std::lround(std::clamp(at, 0.0, 1.0) * static_cast<double>(points - 1)));
  m[j] = 1.0;
  return GridDensity(std::move(m));
}

GridDensity::GridDensity(std::vector<double> masses) : masses_(std::move(masses)) {
  if (masses_.size() < 2) throw InvalidConfig("grid needs at least two points");
  double total = 0.0;
  for (double m : masses_) {
    if (!(m >= 0.0)) throw InvalidConfig("grid density: negative mass");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidConfig("grid density: masses do not sum to 1");
}

double GridDensity::mean() const noexcept {
  double m = 0.0;
  for (std::size_t j = 0; j < masses_.size(); ++j) m += masses_[j] * abscissa(j);
  return std::clamp(m, 0.0, 1.0);
}

GridFilter::GridFilter(const ModelParams& params, std::size_t points)
    : params_(params), points_(points), kernel_(points * points, 0.0) {
  params_.validate();
  if (points < 2) throw InvalidConfig("grid needs at least two points");
  const double h = 1.0 / static_cast<double>(points - 1);
  const double inv_two_var = 1.0 / (2.0 * params_.process_variance);
  for (std::size_t src = 0; src < points; ++src) {
    const double center = params_.forgetting * static_cast<double>(src) * h;
    double* row = &kernel_[src * points];
    double total = 0.0;
    for (std::size_t dst = 0; dst < points; ++dst) {
      const double d = static_cast<double>(dst) * h - center;
      row[dst] = std::exp(-d * d * inv_two_var);
      total += row[dst];
    }
    if (total > 0.0) {
      for (std::size_t dst = 0; dst < points; ++dst) row[dst] /= total;
    } else {
      // Variance far below the grid spacing: the kernel collapses onto the nearest point.
      const auto nearest = static_cast<std::size_t>(std::lround(center / h));
      row[std::min(nearest, points - 1)] = 1.0;
    }
  }
}

GridDensity GridFilter::step(const GridDensity& prior, std::optional<double> voting_avg) const {
  if (prior.size() != points_) throw InvalidConfig("grid density size does not match filter");
  std::vector<double> predicted(points_, 0.0);
  const auto p = prior.masses();
  for (std::size_t src = 0; src < points_; ++src) {
    if (p[src] == 0.0) continue;
    const double* row = &kernel_[src * points_];
    for (std::size_t dst = 0; dst < points_; ++dst) predicted[dst] += p[src] * row[dst];
  }
  if (voting_avg) {
    const double v = *voting_avg;
    const double h = 1.0 / static_cast<double>(points_ - 1);
    for (std::size_t j = 0; j < points_; ++j) {
      predicted[j] *= std::exp(-std::abs(static_cast<double>(j) * h - v) /
                               params_.likelihood_sharpness);
    }
  }
  const double total = std::accumulate(predicted.begin(), predicted.end(), 0.0);
  if (!(total > 0.0)) return GridDensity::uniform(points_);
  for (auto& x : predicted) x /= total;
  return GridDensity(std::move(predicted));
}

GridStepOutput grid_filter_step(const GridDensity& prior, std::optional<double> voting_avg,
                                const ModelParams& params) {
  GridFilter filter(params, prior.size());
  auto posterior = filter.step(prior, voting_avg);
  const TrustEstimate estimate(posterior.mean());
  return GridStepOutput{std::move(posterior), estimate};
}

}  // namespace btm
