#include "tablesum/slice.hpp"

#include <cmath>
#include <set>

#include "tablesum/errors.hpp"

namespace tablesum {

std::optional<std::string> SliceSpec::value_of(std::string_view dimension) const {
  for (const auto& a : assignments) {
    if (a.dimension == dimension) return a.value;
  }
  return std::nullopt;
}

std::string SliceSpec::id() const {
  std::string out;
  for (const auto& a : assignments) {
    out += a.value;
    out += '|';
  }
  out += current.to_string();
  return out;
}

void validate_spec(const SliceSpec& spec, const Schema& schema) {
  std::set<std::string> seen;
  for (const auto& a : spec.assignments) {
    if (!schema.is_dimension(a.dimension)) {
      throw SpecError("'" + a.dimension + "' is not a dimension column");
    }
    if (!seen.insert(a.dimension).second) {
      throw SpecError("dimension '" + a.dimension + "' assigned twice");
    }
  }
  if (spec.current == spec.previous) {
    throw SpecError("current and previous period are both " + spec.current.to_string());
  }
}

SlicePair slice(const Table& table, const SliceSpec& spec) {
  validate_spec(spec, table.schema());

  std::vector<std::pair<const std::vector<std::string>*, const std::string*>> filters;
  filters.reserve(spec.assignments.size());
  for (const auto& a : spec.assignments) {
    filters.emplace_back(&table.text_column(*table.schema().find(a.dimension)), &a.value);
  }

  const auto& dates = table.dates();
  SlicePair out;
  for (RowIndex r = 0; r < table.rows(); ++r) {
    const Period p = dates[r].period();
    const bool is_current = p == spec.current;
    if (!is_current && p != spec.previous) continue;
    bool match = true;
    for (const auto& [column, value] : filters) {
      if ((*column)[r] != *value) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    (is_current ? out.current : out.previous).push_back(r);
  }
  return out;
}

std::optional<double> AggregatedMetrics::value(std::string_view measure) const {
  for (const auto& [name, v] : values) {
    if (name == measure) return v;
  }
  return std::nullopt;
}

AggregatedMetrics aggregate(const Table& table, const RowSet& rows, Period period) {
  const auto& schema = table.schema();
  const auto& dates = table.dates();
  for (RowIndex r : rows) {
    if (r >= table.rows() || dates[r].period() != period) {
      throw ConsistencyError("row " + std::to_string(r) + " is not in period " +
                             period.to_string());
    }
  }

  AggregatedMetrics out;
  out.period = period;
  out.row_count = rows.size();
  for (std::size_t col : schema.measure_columns()) {
    const auto& values = table.measure_column(col);
    // Neumaier summation keeps partition totals consistent with the whole.
    double sum = 0.0;
    double carry = 0.0;
    for (RowIndex r : rows) {
      const double x = values[r];
      const double t = sum + x;
      if (std::abs(sum) >= std::abs(x)) {
        carry += (sum - t) + x;
      } else {
        carry += (x - t) + sum;
      }
      sum = t;
    }
    out.values.emplace_back(schema[col].name, sum + carry);
  }
  return out;
}

}  // namespace tablesum
