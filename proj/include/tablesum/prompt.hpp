#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tablesum/context_store.hpp"
#include "tablesum/slice.hpp"
#include "tablesum/variance.hpp"

namespace tablesum {

/// A: task "summarize_sales_data", "context" header, no deltas, instructions
/// trailer. B: task "summarize_table_slice", "dimension_context" header,
/// delta_percent per metric, expected_tone trailer.
enum class PromptProfile { kA, kB };

std::string to_string(PromptProfile profile);
std::optional<PromptProfile> parse_profile(std::string_view text);

inline constexpr const char* kProfileAInstructions =
    "Please quantify numbers for units_sold and sales_revenue provided in metrics. "
    "Focus on comparison with previous month.";

struct ProfileSettings {
  PromptProfile profile = PromptProfile::kB;
  int delta_decimals = 2;  // rounding of the delta ratio (-0.64 style)
  int value_decimals = 2;  // rounding of decimal measure values
  std::string instructions = kProfileAInstructions;
  std::string expected_tone = "executive";
};

struct PromptMetric {
  std::string name;
  double current = 0.0;
  double previous = 0.0;
  bool integral = false;
  std::optional<double> delta_percent;  // rounded ratio, absent for A / no variance / zero baseline
};

/// The structured payload handed to the generator.
struct PromptEnvelope {
  PromptProfile profile = PromptProfile::kB;
  std::string task;
  std::vector<std::pair<std::string, std::string>> dimension_context;  // includes time_period
  std::vector<PromptMetric> metrics;
  std::vector<std::string> context_signals;
  std::string trailer_key;
  std::string trailer_text;
};

/// "<current> vs <previous>" with YYYY-MM periods.
std::string time_period_label(const SliceSpec& spec);

/// Envelope from computed deltas. Requires region and category assignments
/// in `spec` (SpecError otherwise).
PromptEnvelope build_prompt(const Schema& schema, const std::vector<MetricDelta>& deltas,
                            const SliceSpec& spec, const std::vector<ContextSignal>& signals,
                            const ProfileSettings& settings);

/// Envelope from raw aggregates, for runs where variance did not execute.
/// Throws ConsistencyError for profile B while `variance_enabled` is set,
/// since such a prompt would silently lose its deltas.
PromptEnvelope build_prompt(const Schema& schema, const AggregatedMetrics& current,
                            const AggregatedMetrics& previous, const SliceSpec& spec,
                            const std::vector<ContextSignal>& signals,
                            const ProfileSettings& settings, bool variance_enabled);

nlohmann::ordered_json to_json(const PromptEnvelope& envelope);

/// Two-space indented JSON with insertion-ordered keys and no trailing newline.
std::string canonical_json(const nlohmann::ordered_json& value);

std::string serialize_prompt(const PromptEnvelope& envelope);

/// Flat baseline: the sliced rows verbatim plus a generic instruction.
std::string build_flat_prompt(const Table& table, const SlicePair& rows, const SliceSpec& spec);

inline constexpr const char* kFlatPromptInstruction =
    "Given the following structured summary task, write a concise business insight "
    "highlighting the numbers passed in the prompt.";

/// "sales_revenue" -> "Sales revenue".
std::string measure_label(std::string_view measure);

/// Template baseline: one fixed sentence shell per measure.
std::string template_nlg(const std::vector<MetricDelta>& deltas, const SliceSpec& spec);

}  // namespace tablesum
