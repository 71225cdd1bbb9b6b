#include "btm/detection.hpp"

#include <numeric>

#include "btm/errors.hpp"

namespace btm {

void SensingRange::validate() const {
  if (!(x_min < x_max)) throw InvalidConfig("sensing range requires x_min < x_max");
}

double trusted_reading_estimate(const CommunityObservation& obs) {
  obs.validate();
  if (obs.member_readings.empty()) throw EmptyCommunity();
  double weighted = 0.0;
  double trust_sum = 0.0;
  for (std::size_t j = 0; j < obs.member_readings.size(); ++j) {
    weighted += obs.member_trusts[j] * obs.member_readings[j];
    trust_sum += obs.member_trusts[j];
  }
  if (trust_sum < 1e-9) {
    const double sum = std::accumulate(obs.member_readings.begin(), obs.member_readings.end(), 0.0);
    return sum / static_cast<double>(obs.member_readings.size());
  }
  return weighted / trust_sum;
}

DecisionRule select_rule(TrustEstimate trust, const CommunityObservation& obs,
                         const SensingRange& range, const ModelParams& params) {
  if (obs.center_reading && trust.value() > params.trust_threshold) {
    return range.contains(*obs.center_reading) ? DecisionRule::kTrustedInRange
                                               : DecisionRule::kTrustedOutOfRange;
  }
  return range.contains(trusted_reading_estimate(obs)) ? DecisionRule::kCommunityInRange
                                                       : DecisionRule::kCommunityOutOfRange;
}

EventIndicator decide_event(TrustEstimate trust, const CommunityObservation& obs,
                            const SensingRange& range, const ModelParams& params) {
  return indicator_for(select_rule(trust, obs, range, params));
}

}  // namespace btm
