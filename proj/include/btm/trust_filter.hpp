#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "btm/random.hpp"

namespace btm {

/// Free parameters of the trust model.
struct ModelParams {
  std::size_t particle_count = 20;  ///< N
  double forgetting = 0.85;         ///< alpha, weight of the previous trust
  double process_variance = 0.01;   ///< Q, variance of the transition noise
  double likelihood_sharpness = 0.1;  ///< beta
  double vote_radius = 5.0;         ///< r, in sensor-reading units
  double trust_threshold = 0.3;     ///< lambda_thr
  /// Systematic resampling when ESS < N/2. Disable to run plain SIS.
  bool resample = true;

  /// Throws InvalidConfig when any field is out of its domain.
  void validate() const;

  /// The operating point used in the reference experiments.
  static ModelParams reference() { return ModelParams{}; }
};

/// Trust of one node, guaranteed to lie in [0, 1].
class TrustEstimate {
 public:
  constexpr TrustEstimate() = default;
  explicit TrustEstimate(double value);

  constexpr double value() const noexcept { return value_; }
  friend constexpr bool operator==(TrustEstimate, TrustEstimate) = default;

 private:
  double value_ = 1.0;
};

/// Weighted particle approximation of a trust posterior.
///
/// Particles live in [0, 1]; weights are strictly positive and sum to one.
class ParticleSet {
 public:
  /// N particles at trust 1.0 with uniform weights (a node that starts fully trusted).
  static ParticleSet full_trust(std::size_t n);

  /// Validates and adopts the given particles and weights.
  ParticleSet(std::vector<double> particles, std::vector<double> weights);

  std::size_t size() const noexcept { return particles_.size(); }
  std::span<const double> particles() const noexcept { return particles_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Posterior mean, the minimum mean squared error estimate.
  double mean() const noexcept;
  /// 1 / sum(w^2).
  double effective_sample_size() const noexcept;

  friend bool operator==(const ParticleSet&, const ParticleSet&) = default;

 private:
  std::vector<double> particles_;
  std::vector<double> weights_;
};

/// What one center node sees at one step: its own reading plus its members'.
///
/// Members that produced no reading (sleepers) are left out, so member_count()
/// counts only the members that actually reported.
struct CommunityObservation {
  std::optional<double> center_reading;
  std::vector<double> member_readings;
  std::vector<double> member_trusts;

  std::size_t member_count() const noexcept { return member_readings.size(); }
  /// Throws InvalidConfig when readings and trusts differ in length or a trust is outside [0,1].
  void validate() const;
  /// True when no likelihood can be formed and the filter must only predict.
  bool prediction_only() const noexcept {
    return !center_reading.has_value() || member_readings.empty();
  }
};

/// Draws lambda_k = alpha * lambda_prev + v, v ~ N(0, Q), redrawing until the result is in [0,1].
double propagate_particle(double lambda_prev, const ModelParams& params, Rng& rng);

/// 1 when the member agrees with the center within the vote radius (strict), else 0.
int vote(double member_reading, double center_reading, const ModelParams& params) noexcept;

/// Fraction of members whose readings agree with the center reading.
double voting_average(const CommunityObservation& obs, const ModelParams& params);

/// exp(-|lambda - V| / beta).
double likelihood(double lambda, double voting_avg, const ModelParams& params) noexcept;

struct FilterOutput {
  ParticleSet particles;
  TrustEstimate estimate;
  bool resampled = false;
  /// Every likelihood underflowed and uniform weights were substituted.
  bool degenerate = false;
};

/// One filter update driven directly by a voting average; nullopt takes the
/// prediction-only path.
FilterOutput filter_step(const ParticleSet& state, std::optional<double> voting_avg,
                         const ModelParams& params, Rng& rng);

/// One filter update from a community observation. Sleeper centers and empty
/// communities take the prediction-only path.
FilterOutput filter_step(const ParticleSet& state, const CommunityObservation& obs,
                         const ModelParams& params, Rng& rng);

/// Systematic resampling: returns N indices drawn with a single uniform offset.
std::vector<std::size_t> systematic_resample_indices(std::span<const double> weights, Rng& rng);

}  // namespace btm
