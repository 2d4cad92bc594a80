#pragma once

#include <string>
#include <vector>

#include "tablesum/slice.hpp"

namespace tablesum {

inline constexpr double kDefaultEpsilon = 1e-9;

struct DeltaValue {
  double delta = 0.0;
  bool baseline_zero = false;
};

/// Relative change of one measure between two periods.
struct MetricDelta {
  std::string measure;
  double current = 0.0;
  double previous = 0.0;
  double delta = 0.0;
  /// previous == 0; the ratio is still computed but is not narratable.
  bool baseline_zero = false;
};

/// (current - previous) / (previous + epsilon).
///
/// epsilon must be >= 0; the default keeps the denominator away from zero for
/// a zero baseline. Throws NumericDomainError for non-finite inputs, a
/// negative epsilon, a zero denominator, or a non-finite result.
DeltaValue compute_delta(double current, double previous, double epsilon = kDefaultEpsilon);

/// One MetricDelta per measure, in schema order. Throws ConsistencyError if
/// the two records do not cover the same measures in the same order.
std::vector<MetricDelta> compute_all_deltas(const AggregatedMetrics& current,
                                            const AggregatedMetrics& previous,
                                            double epsilon = kDefaultEpsilon);

}  // namespace tablesum
