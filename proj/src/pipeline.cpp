#include "tablesum/pipeline.hpp"

#include "tablesum/errors.hpp"

namespace tablesum {
namespace {

void require_running(const PipelineState& state, const char* agent) {
  if (state.status() != RunStatus::kRunning) {
    throw ConsistencyError(std::string(agent) + " needs a running state, found " +
                           to_string(state.status()));
  }
}

}  // namespace

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kRunning: return "running";
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kSkippedEmptySlice: return "skipped-empty-slice";
    case RunStatus::kFailed: return "failed";
  }
  return "failed";
}

std::string to_string(NodeOutcome outcome) {
  switch (outcome) {
    case NodeOutcome::kOk: return "ok";
    case NodeOutcome::kSkipped: return "skipped";
    case NodeOutcome::kDisabled: return "disabled";
    case NodeOutcome::kFailed: return "failed";
  }
  return "failed";
}

void PipelineState::set_aggregates(AggregatedMetrics current, AggregatedMetrics previous) {
  if (current_ || previous_) throw WriteOnceViolation("aggregates");
  current_ = std::move(current);
  previous_ = std::move(previous);
}

void PipelineState::set_prompt(PromptEnvelope envelope, std::string text) {
  if (envelope_ || prompt_text_) throw WriteOnceViolation("prompt");
  envelope_ = std::move(envelope);
  prompt_text_ = std::move(text);
}

void PipelineState::set_summary(std::string text, GenerationResponse response) {
  if (summary_) throw WriteOnceViolation("summary");
  summary_ = std::move(text);
  generation_ = std::move(response);
}

const nlohmann::json* PipelineState::extra(const std::string& key) const {
  auto it = extras_.find(key);
  return it == extras_.end() ? nullptr : &it->second;
}

void PipelineState::set_extra(const std::string& key, nlohmann::json value) {
  if (!extras_.emplace(key, std::move(value)).second) throw WriteOnceViolation(key);
}

std::vector<std::string> PipelineState::keys() const {
  std::vector<std::string> out;
  if (slice_spec_) out.emplace_back("slice_spec");
  if (slice_pair_) out.emplace_back("slice_pair");
  if (current_) out.emplace_back("aggregates");
  if (deltas_) out.emplace_back("deltas");
  if (signals_) out.emplace_back("context_signals");
  if (envelope_) out.emplace_back("prompt");
  if (summary_) out.emplace_back("summary");
  for (const auto& [key, value] : extras_) out.push_back(key);
  return out;
}

void PipelineState::set_status(RunStatus status) {
  if (status_ != RunStatus::kRunning) {
    throw ConsistencyError("status is already " + to_string(status_));
  }
  status_ = status;
}

PipelineState new_state() { return PipelineState{}; }

std::set<std::string> AblationConfig::disabled_nodes() const {
  std::set<std::string> out;
  if (!variance_enabled) out.insert(kVarianceNode);
  if (!context_enabled) out.insert(kContextNode);
  return out;
}

std::string AblationConfig::label() const {
  if (variance_enabled && context_enabled) return "full";
  if (!variance_enabled && !context_enabled) return "no-variance-no-context";
  return variance_enabled ? "no-context" : "no-variance";
}

void slice_agent(PipelineState& state, const Table& table, const SliceSpec& spec) {
  if (state.slice_spec()) throw WriteOnceViolation("slice_spec");
  require_running(state, "slice agent");
  validate_spec(spec, table.schema());
  auto pair = slice(table, spec);
  auto current = aggregate(table, pair.current, spec.current);
  auto previous = aggregate(table, pair.previous, spec.previous);
  const bool empty = pair.empty();
  state.set_slice_spec(spec);
  state.set_slice_pair(std::move(pair));
  state.set_aggregates(std::move(current), std::move(previous));
  if (empty) state.set_status(RunStatus::kSkippedEmptySlice);
}

void variance_agent(PipelineState& state, double epsilon) {
  if (state.deltas()) throw WriteOnceViolation("deltas");
  require_running(state, "variance agent");
  if (!state.current_aggregate() || !state.previous_aggregate()) {
    throw ConsistencyError("variance agent needs both aggregates");
  }
  state.set_deltas(
      compute_all_deltas(*state.current_aggregate(), *state.previous_aggregate(), epsilon));
}

void context_agent(PipelineState& state, const ContextStore& store) {
  require_running(state, "context agent");
  if (!state.slice_spec()) throw ConsistencyError("context agent needs a slice spec");
  state.set_context_signals(store.lookup(*state.slice_spec()));
}

void summary_agent(PipelineState& state, const Schema& schema, Backend& backend,
                   const PipelineOptions& options) {
  require_running(state, "summary agent");
  if (!state.slice_spec() || !state.current_aggregate() || !state.previous_aggregate()) {
    throw ConsistencyError("summary agent needs a sliced state");
  }
  const bool variance_on = options.ablation.variance_enabled;
  if (variance_on && !state.deltas()) {
    throw ConsistencyError("summary agent needs deltas while variance is enabled");
  }
  static const std::vector<ContextSignal> kNoSignals;
  const auto& signals = state.context_signals() ? *state.context_signals() : kNoSignals;

  PromptEnvelope envelope =
      variance_on && state.deltas()
          ? build_prompt(schema, *state.deltas(), *state.slice_spec(), signals, options.prompt)
          : build_prompt(schema, *state.current_aggregate(), *state.previous_aggregate(),
                         *state.slice_spec(), signals, options.prompt, variance_on);
  std::string text = serialize_prompt(envelope);
  state.set_prompt(std::move(envelope), text);

  auto response = backend.generate({std::move(text), options.max_tokens});
  if (response.text.empty()) throw BackendError("backend returned an empty summary", response.attempts);
  std::string summary = response.text;
  state.set_summary(std::move(summary), std::move(response));
  state.set_status(RunStatus::kCompleted);
}

PipelineGraph& PipelineGraph::register_node(AgentNode node, std::size_t position) {
  if (node.name.empty()) throw ConfigError("node name must not be empty");
  if (position_of(node.name)) throw ConfigError("duplicate node name '" + node.name + "'");
  if (!node.transform) throw ConfigError("node '" + node.name + "' has no transform");
  position = std::min(position, nodes_.size());
  nodes_.insert(nodes_.begin() + static_cast<std::ptrdiff_t>(position), std::move(node));
  return *this;
}

std::optional<std::size_t> PipelineGraph::position_of(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  return std::nullopt;
}

PipelineGraph reference_graph() {
  PipelineGraph graph;
  graph.append({kSliceNode,
                [](PipelineState& s, const RunContext& ctx) {
                  slice_agent(s, ctx.table, ctx.spec);
                },
                {}});
  graph.append({kVarianceNode,
                [](PipelineState& s, const RunContext& ctx) {
                  variance_agent(s, ctx.options.epsilon);
                },
                {}});
  graph.append({kContextNode,
                [](PipelineState& s, const RunContext& ctx) { context_agent(s, ctx.store); },
                {}});
  graph.append({kSummaryNode,
                [](PipelineState& s, const RunContext& ctx) {
                  summary_agent(s, ctx.table.schema(), ctx.backend, ctx.options);
                },
                {}});
  return graph;
}

RunResult run_pipeline(const PipelineGraph& graph, const Table& table, const SliceSpec& spec,
                       const ContextStore& store, Backend& backend,
                       const PipelineOptions& options) {
  RunResult result;
  PipelineState& state = result.state;
  const RunContext ctx{table, spec, store, backend, options};
  const auto disabled = options.ablation.disabled_nodes();

  for (const auto& node : graph.nodes()) {
    TraceEntry entry;
    entry.node = node.name;
    if (disabled.contains(node.name)) {
      entry.outcome = NodeOutcome::kDisabled;
      state.append_trace(std::move(entry));
      continue;
    }
    if (state.status() != RunStatus::kRunning || (node.guard && !node.guard(state))) {
      entry.outcome = NodeOutcome::kSkipped;
      state.append_trace(std::move(entry));
      continue;
    }
    const bool had_generation = state.generation().has_value();
    const auto start = std::chrono::steady_clock::now();
    try {
      node.transform(state, ctx);
      entry.outcome = NodeOutcome::kOk;
      if (!had_generation && state.generation()) entry.attempts = state.generation()->attempts;
    } catch (const BackendError& e) {
      entry.outcome = NodeOutcome::kFailed;
      entry.detail = e.what();
      entry.attempts = e.attempts();
    } catch (const std::exception& e) {
      entry.outcome = NodeOutcome::kFailed;
      entry.detail = e.what();
    }
    entry.duration = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start);
    const bool failed = entry.outcome == NodeOutcome::kFailed;
    const std::string detail = entry.detail;
    state.append_trace(std::move(entry));
    if (failed) {
      if (state.status() == RunStatus::kRunning) state.set_status(RunStatus::kFailed);
      result.message = "node '" + node.name + "' failed: " + detail;
      break;
    }
  }

  if (state.status() == RunStatus::kRunning) state.set_status(RunStatus::kCompleted);
  result.status = state.status();
  result.summary = state.summary();
  if (result.status == RunStatus::kSkippedEmptySlice) {
    result.message = "empty slice: no rows for " + spec.id() + " in " +
                     spec.current.to_string() + " or " + spec.previous.to_string();
  }
  return result;
}

nlohmann::ordered_json trace_to_json(const std::vector<TraceEntry>& trace, bool with_timing) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& e : trace) {
    nlohmann::ordered_json j;
    j["node"] = e.node;
    j["outcome"] = to_string(e.outcome);
    if (with_timing) j["duration_us"] = e.duration.count();
    if (e.attempts) j["attempts"] = *e.attempts;
    if (!e.detail.empty()) j["detail"] = e.detail;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace tablesum
