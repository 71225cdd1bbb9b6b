#pragma once

#include "btm/trust_filter.hpp"

namespace btm {

/// A-priori normal sensing range, closed at both ends.
struct SensingRange {
  double x_min = 15.0;
  double x_max = 25.0;

  void validate() const;
  bool contains(double x) const noexcept { return x >= x_min && x <= x_max; }
};

enum class EventIndicator : int { kNonEvent = 0, kEvent = 1 };

constexpr int to_int(EventIndicator e) noexcept { return static_cast<int>(e); }

/// Which branch of the four-way indicator rule fired.
enum class DecisionRule : int {
  kTrustedInRange = 1,     ///< trusted, own reading in range -> 0
  kTrustedOutOfRange = 2,  ///< trusted, own reading out of range -> 1
  kCommunityInRange = 3,   ///< distrusted, community estimate in range -> 0
  kCommunityOutOfRange = 4,
};

/// Trust-weighted mean of member readings. Falls back to the unweighted mean
/// when the trust sum is below 1e-9. Throws EmptyCommunity when there are no members.
double trusted_reading_estimate(const CommunityObservation& obs);

/// Selects the rule. A missing center reading always routes to the community rules.
DecisionRule select_rule(TrustEstimate trust, const CommunityObservation& obs,
                         const SensingRange& range, const ModelParams& params);

EventIndicator decide_event(TrustEstimate trust, const CommunityObservation& obs,
                            const SensingRange& range, const ModelParams& params);

constexpr EventIndicator indicator_for(DecisionRule rule) noexcept {
  return (rule == DecisionRule::kTrustedOutOfRange || rule == DecisionRule::kCommunityOutOfRange)
             ? EventIndicator::kEvent
             : EventIndicator::kNonEvent;
}

}  // namespace btm
