#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tablesum/period.hpp"
#include "tablesum/table.hpp"

namespace tablesum {

struct DimensionAssignment {
  std::string dimension;
  std::string value;

  friend bool operator==(const DimensionAssignment&, const DimensionAssignment&) = default;
};

/// Dimension-value assignments plus the two periods being compared.
struct SliceSpec {
  std::vector<DimensionAssignment> assignments;
  Period current;
  Period previous;

  friend bool operator==(const SliceSpec&, const SliceSpec&) = default;

  std::optional<std::string> value_of(std::string_view dimension) const;
  /// "value|value|...|YYYY-MM", stable across runs.
  std::string id() const;
};

/// Throws SpecError unless every assignment names a distinct dimension column
/// of `schema` and the two periods differ.
void validate_spec(const SliceSpec& spec, const Schema& schema);

using RowSet = std::vector<RowIndex>;

struct SlicePair {
  RowSet previous;  // rows in spec.previous
  RowSet current;   // rows in spec.current

  bool empty() const { return previous.empty() && current.empty(); }
};

/// Rows matching every assignment whose date falls in each period, in table order.
SlicePair slice(const Table& table, const SliceSpec& spec);

/// Measure totals over a row subset, keyed in schema measure order.
struct AggregatedMetrics {
  Period period;
  std::vector<std::pair<std::string, double>> values;
  std::size_t row_count = 0;

  bool empty() const { return row_count == 0; }
  std::optional<double> value(std::string_view measure) const;
};

/// SUM of each measure over `rows`. Every row must lie in `period`
/// (ConsistencyError otherwise). Uses compensated summation.
AggregatedMetrics aggregate(const Table& table, const RowSet& rows, Period period);

}  // namespace tablesum
