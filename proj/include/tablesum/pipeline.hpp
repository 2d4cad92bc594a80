#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tablesum/backend.hpp"
#include "tablesum/context_store.hpp"
#include "tablesum/errors.hpp"
#include "tablesum/prompt.hpp"
#include "tablesum/slice.hpp"
#include "tablesum/variance.hpp"

namespace tablesum {

enum class RunStatus { kRunning, kCompleted, kSkippedEmptySlice, kFailed };
enum class NodeOutcome { kOk, kSkipped, kDisabled, kFailed };

std::string to_string(RunStatus status);
std::string to_string(NodeOutcome outcome);

struct TraceEntry {
  std::string node;
  NodeOutcome outcome = NodeOutcome::kOk;
  std::chrono::microseconds duration{0};
  std::string detail;
  std::optional<int> attempts;  // backend attempts made by this node
};

/// Accumulating run state. Every slot, including the free-form extension
/// slots, is write-once: a second write throws WriteOnceViolation.
class PipelineState {
 public:
  RunStatus status() const { return status_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

  const std::optional<SliceSpec>& slice_spec() const { return slice_spec_; }
  const std::optional<SlicePair>& slice_pair() const { return slice_pair_; }
  const std::optional<AggregatedMetrics>& current_aggregate() const { return current_; }
  const std::optional<AggregatedMetrics>& previous_aggregate() const { return previous_; }
  const std::optional<std::vector<MetricDelta>>& deltas() const { return deltas_; }
  const std::optional<std::vector<ContextSignal>>& context_signals() const { return signals_; }
  const std::optional<PromptEnvelope>& prompt_envelope() const { return envelope_; }
  const std::optional<std::string>& prompt_text() const { return prompt_text_; }
  const std::optional<std::string>& summary() const { return summary_; }
  const std::optional<GenerationResponse>& generation() const { return generation_; }

  void set_slice_spec(SliceSpec v) { write_once(slice_spec_, std::move(v), "slice_spec"); }
  void set_slice_pair(SlicePair v) { write_once(slice_pair_, std::move(v), "slice_pair"); }
  void set_aggregates(AggregatedMetrics current, AggregatedMetrics previous);
  void set_deltas(std::vector<MetricDelta> v) { write_once(deltas_, std::move(v), "deltas"); }
  void set_context_signals(std::vector<ContextSignal> v) {
    write_once(signals_, std::move(v), "context_signals");
  }
  void set_prompt(PromptEnvelope envelope, std::string text);
  void set_summary(std::string text, GenerationResponse response);

  /// Extension slots for nodes beyond the four canonical agents.
  const nlohmann::json* extra(const std::string& key) const;
  void set_extra(const std::string& key, nlohmann::json value);
  std::vector<std::string> keys() const;

  /// Running -> any terminal status, once.
  void set_status(RunStatus status);
  void append_trace(TraceEntry entry) { trace_.push_back(std::move(entry)); }

 private:
  template <typename T>
  static void write_once(std::optional<T>& slot, T value, const char* key) {
    if (slot) throw WriteOnceViolation(key);
    slot = std::move(value);
  }

  RunStatus status_ = RunStatus::kRunning;
  std::vector<TraceEntry> trace_;
  std::optional<SliceSpec> slice_spec_;
  std::optional<SlicePair> slice_pair_;
  std::optional<AggregatedMetrics> current_;
  std::optional<AggregatedMetrics> previous_;
  std::optional<std::vector<MetricDelta>> deltas_;
  std::optional<std::vector<ContextSignal>> signals_;
  std::optional<PromptEnvelope> envelope_;
  std::optional<std::string> prompt_text_;
  std::optional<std::string> summary_;
  std::optional<GenerationResponse> generation_;
  std::map<std::string, nlohmann::json> extras_;
};

PipelineState new_state();

struct AblationConfig {
  bool variance_enabled = true;
  bool context_enabled = true;

  std::set<std::string> disabled_nodes() const;
  std::string label() const;  // "full", "no-context", "no-variance", ...
};

struct PipelineOptions {
  double epsilon = kDefaultEpsilon;
  ProfileSettings prompt;
  int max_tokens = 512;
  AblationConfig ablation;
};

/// Everything a node may read during one run. Borrowed, never owned.
struct RunContext {
  const Table& table;
  const SliceSpec& spec;
  const ContextStore& store;
  Backend& backend;
  const PipelineOptions& options;
};

// The canonical agents. Each requires a running state and throws on a
// violated precondition; run_pipeline turns throws into a failed status.

/// Writes slice_spec, slice_pair, and both aggregates; marks the state
/// skipped-empty-slice when neither period has rows.
void slice_agent(PipelineState& state, const Table& table, const SliceSpec& spec);

/// Writes the per-measure deltas from the two aggregates.
void variance_agent(PipelineState& state, double epsilon = kDefaultEpsilon);

/// Writes the signals matching the slice in either period (possibly none).
void context_agent(PipelineState& state, const ContextStore& store);

/// Builds and serializes the prompt, calls the backend once, writes the
/// summary, and completes the run.
void summary_agent(PipelineState& state, const Schema& schema, Backend& backend,
                   const PipelineOptions& options);

struct AgentNode {
  std::string name;
  std::function<void(PipelineState&, const RunContext&)> transform;
  /// Optional; false yields "skipped" without calling transform.
  std::function<bool(const PipelineState&)> guard;
};

/// Ordered node list; registration order is execution order.
class PipelineGraph {
 public:
  /// Inserts at `position` (clamped to the end). Throws ConfigError on a
  /// duplicate name.
  PipelineGraph& register_node(AgentNode node, std::size_t position);
  PipelineGraph& append(AgentNode node) { return register_node(std::move(node), nodes_.size()); }

  const std::vector<AgentNode>& nodes() const { return nodes_; }
  std::optional<std::size_t> position_of(std::string_view name) const;

 private:
  std::vector<AgentNode> nodes_;
};

inline constexpr const char* kSliceNode = "slice";
inline constexpr const char* kVarianceNode = "variance";
inline constexpr const char* kContextNode = "context";
inline constexpr const char* kSummaryNode = "summary";

/// slice -> variance -> context -> summary.
PipelineGraph reference_graph();

struct RunResult {
  RunStatus status = RunStatus::kRunning;
  std::optional<std::string> summary;
  std::string message;  // skip or failure report
  PipelineState state;
};

/// Runs every node in order. A non-running status makes later nodes
/// "skipped"; nodes named in the ablation config record "disabled"; the
/// first failure halts execution with a failed status.
RunResult run_pipeline(const PipelineGraph& graph, const Table& table, const SliceSpec& spec,
                       const ContextStore& store, Backend& backend,
                       const PipelineOptions& options);

/// Trace as JSON. Durations are included only when `with_timing` is set.
nlohmann::ordered_json trace_to_json(const std::vector<TraceEntry>& trace, bool with_timing);

}  // namespace tablesum
