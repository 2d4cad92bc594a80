#include "tablesum/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "tablesum/errors.hpp"

namespace tablesum {
namespace {

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(value * scale) / scale;
  return r == 0 ? 0.0 : r;  // no "-0.0"
}

bool is_integral_measure(const Schema& schema, const std::string& name) {
  auto idx = schema.find(name);
  return idx && schema[*idx].type == ValueType::kInteger;
}

std::vector<std::pair<std::string, std::string>> dimension_header(const SliceSpec& spec) {
  auto region = spec.value_of("region");
  std::string category_key = spec.value_of("product_category") ? "product_category" : "category";
  auto category = spec.value_of(category_key);
  if (!region || !category) {
    throw SpecError("prompt needs region and product_category assignments");
  }
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("region", *region);
  out.emplace_back("product_category", *category);
  out.emplace_back("time_period", time_period_label(spec));
  for (const auto& a : spec.assignments) {
    if (a.dimension == "region" || a.dimension == category_key) continue;
    out.emplace_back(a.dimension, a.value);
  }
  return out;
}

PromptEnvelope envelope_shell(const SliceSpec& spec, const std::vector<ContextSignal>& signals,
                              const ProfileSettings& settings) {
  PromptEnvelope env;
  env.profile = settings.profile;
  env.dimension_context = dimension_header(spec);
  for (const auto& s : signals) env.context_signals.push_back(s.describe());
  if (settings.profile == PromptProfile::kA) {
    env.task = "summarize_sales_data";
    env.trailer_key = "instructions";
    env.trailer_text = settings.instructions;
  } else {
    env.task = "summarize_table_slice";
    env.trailer_key = "expected_tone";
    env.trailer_text = settings.expected_tone;
  }
  return env;
}

PromptMetric make_metric(const Schema& schema, const std::string& name, double current,
                         double previous, const ProfileSettings& settings) {
  PromptMetric m;
  m.name = name;
  m.integral = is_integral_measure(schema, name);
  m.current = m.integral ? std::round(current) : round_to(current, settings.value_decimals);
  m.previous = m.integral ? std::round(previous) : round_to(previous, settings.value_decimals);
  return m;
}

nlohmann::ordered_json number(double value, bool integral) {
  if (integral) return static_cast<std::int64_t>(std::llround(value));
  return value;
}

}  // namespace

std::string to_string(PromptProfile profile) {
  return profile == PromptProfile::kA ? "A" : "B";
}

std::optional<PromptProfile> parse_profile(std::string_view text) {
  if (text == "A" || text == "a") return PromptProfile::kA;
  if (text == "B" || text == "b") return PromptProfile::kB;
  return std::nullopt;
}

std::string time_period_label(const SliceSpec& spec) {
  return spec.current.to_string() + " vs " + spec.previous.to_string();
}

PromptEnvelope build_prompt(const Schema& schema, const std::vector<MetricDelta>& deltas,
                            const SliceSpec& spec, const std::vector<ContextSignal>& signals,
                            const ProfileSettings& settings) {
  PromptEnvelope env = envelope_shell(spec, signals, settings);
  for (const auto& d : deltas) {
    auto m = make_metric(schema, d.measure, d.current, d.previous, settings);
    if (settings.profile == PromptProfile::kB && !d.baseline_zero) {
      m.delta_percent = round_to(d.delta, settings.delta_decimals);
    }
    env.metrics.push_back(std::move(m));
  }
  return env;
}

PromptEnvelope build_prompt(const Schema& schema, const AggregatedMetrics& current,
                            const AggregatedMetrics& previous, const SliceSpec& spec,
                            const std::vector<ContextSignal>& signals,
                            const ProfileSettings& settings, bool variance_enabled) {
  if (settings.profile == PromptProfile::kB && variance_enabled) {
    throw ConsistencyError("profile B with variance enabled needs computed deltas");
  }
  if (current.values.size() != previous.values.size()) {
    throw ConsistencyError("aggregates cover different measure sets");
  }
  PromptEnvelope env = envelope_shell(spec, signals, settings);
  for (std::size_t i = 0; i < current.values.size(); ++i) {
    const auto& [name, cur] = current.values[i];
    if (previous.values[i].first != name) {
      throw ConsistencyError("measure mismatch: '" + name + "'");
    }
    env.metrics.push_back(make_metric(schema, name, cur, previous.values[i].second, settings));
  }
  return env;
}

nlohmann::ordered_json to_json(const PromptEnvelope& envelope) {
  nlohmann::ordered_json j;
  j["task"] = envelope.task;
  auto& header = j[envelope.profile == PromptProfile::kA ? "context" : "dimension_context"];
  header = nlohmann::ordered_json::object();
  for (const auto& [key, value] : envelope.dimension_context) header[key] = value;
  auto& metrics = j["metrics"];
  metrics = nlohmann::ordered_json::object();
  for (const auto& m : envelope.metrics) {
    nlohmann::ordered_json entry;
    entry["current"] = number(m.current, m.integral);
    entry["previous"] = number(m.previous, m.integral);
    if (m.delta_percent) entry["delta_percent"] = *m.delta_percent;
    metrics[m.name] = std::move(entry);
  }
  if (!envelope.context_signals.empty()) j["context_signals"] = envelope.context_signals;
  j[envelope.trailer_key] = envelope.trailer_text;
  return j;
}

std::string canonical_json(const nlohmann::ordered_json& value) { return value.dump(2); }

std::string serialize_prompt(const PromptEnvelope& envelope) {
  return canonical_json(to_json(envelope));
}

std::string build_flat_prompt(const Table& table, const SlicePair& rows, const SliceSpec&) {
  const auto& schema = table.schema();
  const std::size_t label_col = schema.find("region").value_or(schema.dimension_columns().front());
  const auto& labels = table.text_column(label_col);
  const auto& dates = table.dates();

  RowSet ordered = rows.previous;
  ordered.insert(ordered.end(), rows.current.begin(), rows.current.end());
  std::sort(ordered.begin(), ordered.end());

  std::string out = "Table:\n";
  for (RowIndex r : ordered) {
    out += labels[r];
    out += " | ";
    out += dates[r].period().to_slash_string();
    out += " | ";
    bool first = true;
    for (std::size_t col : schema.measure_columns()) {
      const auto& name = schema[col].name;
      std::string label = name == "sales_revenue" ? "Revenue"
                          : name == "units_sold"  ? "Units"
                                                  : measure_label(name);
      if (!first) out += ", ";
      first = false;
      out += label + ": " + format_shortest(table.measure_column(col)[r]);
    }
    out += "\n";
  }
  out += "\n";
  out += kFlatPromptInstruction;
  return out;
}

std::string measure_label(std::string_view measure) {
  std::string out(measure);
  std::replace(out.begin(), out.end(), '_', ' ');
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string template_nlg(const std::vector<MetricDelta>& deltas, const SliceSpec& spec) {
  std::string where;
  for (const auto& a : spec.assignments) {
    if (!where.empty()) where += ' ';
    where += a.value;
  }
  const std::string suffix = " in " + where + " (" + time_period_label(spec) + ").";

  std::string out;
  for (const auto& d : deltas) {
    if (!out.empty()) out += ' ';
    out += measure_label(d.measure);
    if (d.baseline_zero) {
      out += " started from zero at " + format_decimal(d.current, 2) + suffix;
      continue;
    }
    const char* verb = d.delta > 0 ? " increased" : d.delta < 0 ? " decreased" : " was unchanged";
    char pct[64];
    std::snprintf(pct, sizeof pct, "%.1f", std::abs(d.delta) * 100.0);
    out += verb;
    out += " by ";
    out += pct;
    out += "%" + suffix;
  }
  return out;
}

}  // namespace tablesum
