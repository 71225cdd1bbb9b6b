#include "btm/baselines.hpp"

#include <algorithm>

#include "btm/errors.hpp"

namespace btm {

void CusumParams::validate() const {
  if (!(drift > 0.0)) throw InvalidConfig("cusum drift must be > 0");
  if (!(threshold > 0.0)) throw InvalidConfig("cusum threshold must be > 0");
}

std::pair<CusumState, EventIndicator> cusum_update(const CusumState& state,
                                                   std::optional<double> reading,
                                                   const CusumParams& params) {
  CusumState next = state;
  if (reading) {
    const double x = *reading;
    next.s_plus = std::max(0.0, state.s_plus + (x - params.reference - params.drift));
    next.s_minus = std::max(0.0, state.s_minus + (params.reference - x - params.drift));
    next.alarmed = std::max(next.s_plus, next.s_minus) > params.threshold;
  }
  return {next, next.alarmed ? EventIndicator::kEvent : EventIndicator::kNonEvent};
}

}  // namespace btm
