#include "btm/trust_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "btm/errors.hpp"

namespace btm {

namespace {

constexpr std::size_t kMaxRejections = 1'000'000;
constexpr double kWeightSumTolerance = 1e-9;

void normalize_in_place(std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  // A weight that underflows to zero would break strict positivity.
  bool floored = false;
  for (auto& x : w) {
    if (!(x > 0.0)) {
      x = std::numeric_limits<double>::min();
      floored = true;
    }
  }
  if (floored) {
    const double again = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= again;
  }
}

}  // namespace

void ModelParams::validate() const {
  auto fail = [](const std::string& what) { throw InvalidConfig("model params: " + what); };
  if (particle_count < 1) fail("particle_count must be >= 1");
  if (!(forgetting >= 0.0 && forgetting <= 1.0)) fail("forgetting must be in [0,1]");
  if (!(process_variance > 0.0) || !std::isfinite(process_variance)) {
    fail("process_variance must be > 0");
  }
  if (!(likelihood_sharpness > 0.0 && likelihood_sharpness < 1.0)) {
    fail("likelihood_sharpness must be in (0,1)");
  }
  if (!(vote_radius > 0.0)) fail("vote_radius must be > 0");
  if (!(trust_threshold > 0.0 && trust_threshold < 1.0)) fail("trust_threshold must be in (0,1)");
}

TrustEstimate::TrustEstimate(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidConfig("trust estimate out of [0,1]: " + std::to_string(value));
  }
}

ParticleSet ParticleSet::full_trust(std::size_t n) {
  if (n == 0) throw InvalidConfig("particle set must be non-empty");
  return ParticleSet(std::vector<double>(n, 1.0),
                     std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ParticleSet::ParticleSet(std::vector<double> particles, std::vector<double> weights)
    : particles_(std::move(particles)), weights_(std::move(weights)) {
  if (particles_.empty() || particles_.size() != weights_.size()) {
    throw InvalidConfig("particle set: particles and weights must be non-empty and equal length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    if (!(particles_[i] >= 0.0 && particles_[i] <= 1.0)) {
      throw InvalidConfig("particle set: particle outside [0,1]");
    }
    if (!(weights_[i] > 0.0)) throw InvalidConfig("particle set: non-positive weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw InvalidConfig("particle set: weights do not sum to 1");
  }
}

double ParticleSet::mean() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < particles_.size(); ++i) m += weights_[i] * particles_[i];
  return std::clamp(m, 0.0, 1.0);
}

double ParticleSet::effective_sample_size() const noexcept {
  double sq = 0.0;
  for (double w : weights_) sq += w * w;
  return 1.0 / sq;
}

void CommunityObservation::validate() const {
  if (member_readings.size() != member_trusts.size()) {
    throw InvalidConfig("community observation: readings and trusts differ in length");
  }
  for (double t : member_trusts) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidConfig("community observation: trust outside [0,1]");
  }
}

double propagate_particle(double lambda_prev, const ModelParams& params, Rng& rng) {
  std::normal_distribution<double> noise(0.0, std::sqrt(params.process_variance));
  const double center = params.forgetting * lambda_prev;
  for (std::size_t draw = 0; draw < kMaxRejections; ++draw) {
    const double candidate = center + noise(rng);
    if (candidate >= 0.0 && candidate <= 1.0) return candidate;
  }
  throw SamplingExhausted("transition rejected 1e6 draws; process variance is pathological");
}

int vote(double member_reading, double center_reading, const ModelParams& params) noexcept {
  return std::abs(member_reading - center_reading) < params.vote_radius ? 1 : 0;
}

double voting_average(const CommunityObservation& obs, const ModelParams& params) {
  if (!obs.center_reading) throw MissingCenterReading();
  if (obs.member_readings.empty()) throw EmptyCommunity();
  int votes = 0;
  for (double x : obs.member_readings) votes += vote(x, *obs.center_reading, params);
  return static_cast<double>(votes) / static_cast<double>(obs.member_readings.size());
}

double likelihood(double lambda, double voting_avg, const ModelParams& params) noexcept {
  return std::exp(-std::abs(lambda - voting_avg) / params.likelihood_sharpness);
}

std::vector<std::size_t> systematic_resample_indices(std::span<const double> weights, Rng& rng) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> out(n);
  if (n == 0) return out;
  const double step = 1.0 / static_cast<double>(n);
  std::uniform_real_distribution<double> offset(0.0, step);
  const double u0 = offset(rng);
  double cumulative = weights[0];
  std::size_t i = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const double u = u0 + static_cast<double>(m) * step;
    while (u > cumulative && i + 1 < n) {
      ++i;
      cumulative += weights[i];
    }
    out[m] = i;
  }
  return out;
}

FilterOutput filter_step(const ParticleSet& state, std::optional<double> voting_avg,
                         const ModelParams& params, Rng& rng) {
  const std::size_t n = state.size();
  std::vector<double> lambdas(n);
  for (std::size_t i = 0; i < n; ++i) {
    lambdas[i] = propagate_particle(state.particles()[i], params, rng);
  }
  std::vector<double> weights(state.weights().begin(), state.weights().end());

  bool degenerate = false;
  bool resampled = false;
  if (voting_avg) {
    // Sequential importance weights: previous weight times likelihood. With
    // uniform previous weights this is the plain normalized likelihood.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] *= likelihood(lambdas[i], *voting_avg, params);
      total += weights[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      weights.assign(n, 1.0 / static_cast<double>(n));
      degenerate = true;
    } else {
      normalize_in_place(weights);
    }
  }

  double sq = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sq += weights[i] * weights[i];
    mean += weights[i] * lambdas[i];
  }
  mean = std::clamp(mean, 0.0, 1.0);

  if (params.resample && voting_avg && 1.0 / sq < 0.5 * static_cast<double>(n)) {
    const auto idx = systematic_resample_indices(weights, rng);
    std::vector<double> picked(n);
    for (std::size_t i = 0; i < n; ++i) picked[i] = lambdas[idx[i]];
    lambdas = std::move(picked);
    weights.assign(n, 1.0 / static_cast<double>(n));
    resampled = true;
  }

  // Estimate is the weighted mean taken before resampling.
  return FilterOutput{ParticleSet(std::move(lambdas), std::move(weights)), TrustEstimate(mean),
                      resampled, degenerate};
}

FilterOutput filter_step(const ParticleSet& state, const CommunityObservation& obs,
                         const ModelParams& params, Rng& rng) {
  obs.validate();
  std::optional<double> v;
  if (!obs.prediction_only()) v = voting_average(obs, params);
  return filter_step(state, v, params, rng);
}

}  // namespace btm
