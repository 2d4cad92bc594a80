#include "tablesum/variance.hpp"

#include <cmath>

#include "tablesum/errors.hpp"

namespace tablesum {

DeltaValue compute_delta(double current, double previous, double epsilon) {
  if (!std::isfinite(current) || !std::isfinite(previous) || !std::isfinite(epsilon)) {
    throw NumericDomainError("delta inputs must be finite");
  }
  if (epsilon < 0) throw NumericDomainError("epsilon must be non-negative");
  const double denominator = previous + epsilon;
  if (denominator == 0) throw NumericDomainError("delta denominator is zero");
  const double delta = (current - previous) / denominator;
  if (!std::isfinite(delta)) throw NumericDomainError("delta overflowed");
  return {delta, previous == 0};
}

std::vector<MetricDelta> compute_all_deltas(const AggregatedMetrics& current,
                                            const AggregatedMetrics& previous,
                                            double epsilon) {
  if (current.values.size() != previous.values.size()) {
    throw ConsistencyError("aggregates cover different measure sets");
  }
  std::vector<MetricDelta> out;
  out.reserve(current.values.size());
  for (std::size_t i = 0; i < current.values.size(); ++i) {
    const auto& [name, cur] = current.values[i];
    const auto& [prev_name, prev] = previous.values[i];
    if (name != prev_name) {
      throw ConsistencyError("measure mismatch: '" + name + "' vs '" + prev_name + "'");
    }
    auto d = compute_delta(cur, prev, epsilon);
    out.push_back({name, cur, prev, d.delta, d.baseline_zero});
  }
  return out;
}

}  // namespace tablesum
