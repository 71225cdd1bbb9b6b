#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "btm/trust_filter.hpp"

namespace btm {

/// Probability masses on the uniform grid {0, 1/(G-1), ..., 1}.
class GridDensity {
 public:
  /// Equal mass on every grid point.
  static GridDensity uniform(std::size_t points);
  /// All mass on the grid point nearest to `at`.
  static GridDensity point_mass(std::size_t points, double at);

  /// Masses must be nonnegative, sum to 1 within 1e-9, and have at least two points.
  explicit GridDensity(std::vector<double> masses);

  std::size_t size() const noexcept { return masses_.size(); }
  std::span<const double> masses() const noexcept { return masses_; }
  double abscissa(std::size_t j) const noexcept {
    return static_cast<double>(j) / static_cast<double>(masses_.size() - 1);
  }
  double mean() const noexcept;

 private:
  std::vector<double> masses_;
};

/// Exact Bayes recursion for the trust model by quadrature.
///
/// The transition kernel from each source point is the Gaussian
/// N(alpha * lambda, Q) restricted to the grid and renormalized, which is the
/// discrete counterpart of the rejection-truncated transition. Used as the
/// reference against which the particle filter is checked.
class GridFilter {
 public:
  GridFilter(const ModelParams& params, std::size_t points);

  std::size_t points() const noexcept { return points_; }

  /// Predicts through the transition kernel and, when a voting average is
  /// given, multiplies by the likelihood and renormalizes.
  GridDensity step(const GridDensity& prior, std::optional<double> voting_avg) const;

 private:
  ModelParams params_;
  std::size_t points_;
  std::vector<double> kernel_;  // row-major, kernel_[src * points_ + dst]
};

struct GridStepOutput {
  GridDensity posterior;
  TrustEstimate estimate;
};

/// One-shot form that builds the kernel on every call.
GridStepOutput grid_filter_step(const GridDensity& prior, std::optional<double> voting_avg,
                                const ModelParams& params);

}  // namespace btm
