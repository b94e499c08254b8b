#pragma once

#include <cstddef>

namespace sensi {

/// Pass/fail bounds used when comparing Monte-Carlo measurements of the
/// estimator bias against the asymptotic expansions.
struct TheoryThresholds
{
  double t1_ratio_low = 0.6;
  double t1_ratio_high = 1.6;
  double t2_ratio_low = 0.5;
  double t2_ratio_high = 2.0;
  double coefficient_relative_error = 0.30;
  std::size_t coefficient_min_n = 2000;
  double zero_noise_t2_bias = 1e-3;
};

inline constexpr TheoryThresholds kTheoryThresholds{};

} // namespace sensi
