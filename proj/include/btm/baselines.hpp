#pragma once

#include <optional>
#include <utility>

#include "btm/detection.hpp"

namespace btm {

struct CusumParams {
  double reference = 20.0;  ///< in-control mean
  double drift = 10.0;      ///< allowance per step
  double threshold = 1.0;   ///< alarm level

  void validate() const;
};

/// Two-sided CUSUM on a single node's own readings.
struct CusumState {
  double s_plus = 0.0;
  double s_minus = 0.0;
  bool alarmed = false;
};

/// One recursion step. A missing reading leaves the sums untouched and
/// repeats the previous indicator. There is no reset after an alarm.
std::pair<CusumState, EventIndicator> cusum_update(const CusumState& state,
                                                   std::optional<double> reading,
                                                   const CusumParams& params);

}  // namespace btm
