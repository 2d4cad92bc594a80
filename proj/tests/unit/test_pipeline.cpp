#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "support.hpp"
#include "tablesum/errors.hpp"
#include "tablesum/pipeline.hpp"

namespace tablesum {
namespace {

ContextStore fixture_store() {
  std::ifstream in(test::data_path("context.csv"));
  return ContextStore::load(in);
}

std::vector<std::string> outcomes(const PipelineState& state) {
  std::vector<std::string> out;
  for (const auto& e : state.trace()) out.push_back(e.node + ":" + to_string(e.outcome));
  return out;
}

TEST(Pipeline, FixtureRunCompletes) {
  Table t = test::fixture_table();
  EchoBackend echo;
  auto r = run_pipeline(reference_graph(), t, test::fixture_spec(), fixture_store(), echo, {});
  ASSERT_EQ(r.status, RunStatus::kCompleted) << r.message;
  EXPECT_EQ(*r.summary,
            "sales_revenue: current 2899.9, previous 7999.9, change -64%. "
            "units_sold: current 12, previous 10, change +20%.");
  EXPECT_EQ(outcomes(r.state), (std::vector<std::string>{"slice:ok", "variance:ok", "context:ok",
                                                         "summary:ok"}));
  EXPECT_EQ(r.state.trace().back().attempts, 1);
  ASSERT_TRUE(r.state.context_signals());
  EXPECT_EQ(r.state.context_signals()->size(), 1u);
  EXPECT_NE(r.state.prompt_text()->find("President's Day sale"), std::string::npos);
  EXPECT_EQ(r.state.keys(), (std::vector<std::string>{"slice_spec", "slice_pair", "aggregates",
                                                      "deltas", "context_signals", "prompt",
                                                      "summary"}));
}

TEST(Pipeline, EmptySliceSkipsWithoutBackendCalls) {
  Table t = test::fixture_table();
  EchoBackend echo;
  CountingBackend counting(echo);
  SliceSpec spec = test::fixture_spec();
  spec.current = {2025, 6};
  spec.previous = {2025, 5};
  auto r = run_pipeline(reference_graph(), t, spec, fixture_store(), counting, {});
  EXPECT_EQ(r.status, RunStatus::kSkippedEmptySlice);
  EXPECT_EQ(counting.calls(), 0);
  EXPECT_FALSE(r.summary);
  EXPECT_EQ(r.message.rfind("empty slice", 0), 0u);
  EXPECT_EQ(outcomes(r.state), (std::vector<std::string>{"slice:ok", "variance:skipped",
                                                         "context:skipped", "summary:skipped"}));
}

TEST(Pipeline, OneEmptyPeriodStillRuns) {
  Table t = test::fixture_table();
  EchoBackend echo;
  SliceSpec spec = test::fixture_spec();
  spec.current = {2024, 3};
  spec.previous = {2024, 2};
  auto r = run_pipeline(reference_graph(), t, spec, {}, echo, {});
  ASSERT_EQ(r.status, RunStatus::kCompleted) << r.message;
  EXPECT_NE(r.summary->find("current 0.0, previous 2899.9, change -100%"), std::string::npos);
}

TEST(Pipeline, AblationRecordsDisabledNodes) {
  Table t = test::fixture_table();
  EchoBackend echo;
  PipelineOptions options;
  options.ablation = {false, false};
  auto r = run_pipeline(reference_graph(), t, test::fixture_spec(), fixture_store(), echo, options);
  ASSERT_EQ(r.status, RunStatus::kCompleted) << r.message;
  EXPECT_EQ(outcomes(r.state), (std::vector<std::string>{"slice:ok", "variance:disabled",
                                                         "context:disabled", "summary:ok"}));
  EXPECT_FALSE(r.state.deltas());
  EXPECT_FALSE(r.state.context_signals());
  EXPECT_EQ(r.state.prompt_text()->find("delta_percent"), std::string::npos);
  EXPECT_EQ(r.state.prompt_text()->find("context_signals"), std::string::npos);
  EXPECT_EQ(*r.summary,
            "sales_revenue: current 2899.9, previous 7999.9. units_sold: current 12, previous 10.");
}

TEST(Pipeline, AblationLabels) {
  EXPECT_EQ((AblationConfig{true, true}).label(), "full");
  EXPECT_EQ((AblationConfig{true, false}).label(), "no-context");
  EXPECT_EQ((AblationConfig{false, true}).label(), "no-variance");
  EXPECT_EQ((AblationConfig{false, true}).disabled_nodes(), (std::set<std::string>{"variance"}));
}

TEST(PipelineState, WriteOnce) {
  auto state = new_state();
  state.set_deltas({});
  EXPECT_THROW(state.set_deltas({}), WriteOnceViolation);
  state.set_extra("note", 1);
  EXPECT_THROW(state.set_extra("note", 2), WriteOnceViolation);
  EXPECT_EQ(*state.extra("note"), 1);
  EXPECT_EQ(state.extra("missing"), nullptr);
  state.set_status(RunStatus::kCompleted);
  EXPECT_THROW(state.set_status(RunStatus::kFailed), ConsistencyError);
}

TEST(PipelineState, AgentsCannotRewriteTheirKeys) {
  Table t = test::fixture_table();
  EchoBackend echo;
  auto r = run_pipeline(reference_graph(), t, test::fixture_spec(), {}, echo, {});
  ASSERT_EQ(r.status, RunStatus::kCompleted);
  EXPECT_THROW(slice_agent(r.state, t, test::fixture_spec()), WriteOnceViolation);
  EXPECT_THROW(variance_agent(r.state), WriteOnceViolation);
  EXPECT_THROW(context_agent(r.state, {}), ConsistencyError);
}

TEST(PipelineGraph, RegisterNodeRules) {
  auto graph = reference_graph();
  EXPECT_THROW(graph.append({kSliceNode, [](PipelineState&, const RunContext&) {}, {}}), ConfigError);
  EXPECT_THROW(graph.append({"", [](PipelineState&, const RunContext&) {}, {}}), ConfigError);
  EXPECT_THROW(graph.append({"x", {}, {}}), ConfigError);
  graph.register_node({"audit",
                       [](PipelineState& s, const RunContext&) { s.set_extra("audit", "seen"); },
                       {}},
                      2);
  EXPECT_EQ(graph.position_of("audit"), 2u);
  EXPECT_EQ(graph.position_of(kContextNode), 3u);

  Table t = test::fixture_table();
  EchoBackend echo;
  auto r = run_pipeline(graph, t, test::fixture_spec(), {}, echo, {});
  ASSERT_EQ(r.status, RunStatus::kCompleted);
  EXPECT_EQ(*r.state.extra("audit"), "seen");
  EXPECT_EQ(r.state.trace()[2].node, "audit");
}

TEST(PipelineGraph, FalseGuardSkipsNode) {
  auto graph = reference_graph();
  graph.register_node({"never",
                       [](PipelineState& s, const RunContext&) { s.set_extra("never", true); },
                       [](const PipelineState&) { return false; }},
                      1);
  Table t = test::fixture_table();
  EchoBackend echo;
  auto r = run_pipeline(graph, t, test::fixture_spec(), {}, echo, {});
  EXPECT_EQ(r.status, RunStatus::kCompleted);
  EXPECT_EQ(r.state.trace()[1].outcome, NodeOutcome::kSkipped);
  EXPECT_EQ(r.state.extra("never"), nullptr);
}

TEST(Pipeline, FailureHaltsAndIsTraced) {
  auto graph = reference_graph();
  graph.register_node({"boom",
                       [](PipelineState&, const RunContext&) { throw std::runtime_error("kaput"); },
                       {}},
                      1);
  Table t = test::fixture_table();
  EchoBackend echo;
  CountingBackend counting(echo);
  auto r = run_pipeline(graph, t, test::fixture_spec(), {}, counting, {});
  EXPECT_EQ(r.status, RunStatus::kFailed);
  EXPECT_EQ(counting.calls(), 0);
  EXPECT_EQ(outcomes(r.state), (std::vector<std::string>{"slice:ok", "boom:failed"}));
  EXPECT_EQ(r.state.trace().back().detail, "kaput");
  EXPECT_NE(r.message.find("kaput"), std::string::npos);
}

TEST(Pipeline, InvalidSpecFails) {
  Table t = test::fixture_table();
  EchoBackend echo;
  SliceSpec spec{{{"store", "x"}}, {2024, 2}, {2024, 1}};
  auto r = run_pipeline(reference_graph(), t, spec, {}, echo, {});
  EXPECT_EQ(r.status, RunStatus::kFailed);
  EXPECT_EQ(r.state.trace()[0].outcome, NodeOutcome::kFailed);
}

TEST(Pipeline, BackendTimeoutRecordsAttempts) {
  httplib::Server server;
  server.Post("/gen", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    res.set_content("late", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  BackendConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/gen";
  config.api_key_env = "";
  config.timeout_seconds = 0.1;
  config.max_retries = 2;
  config.backoff_base_ms = 1;
  HttpBackend backend(config);
  Table t = test::fixture_table();
  auto r = run_pipeline(reference_graph(), t, test::fixture_spec(), {}, backend, {});
  server.stop();
  th.join();

  EXPECT_EQ(r.status, RunStatus::kFailed);
  const auto& last = r.state.trace().back();
  EXPECT_EQ(last.node, "summary");
  EXPECT_EQ(last.outcome, NodeOutcome::kFailed);
  EXPECT_EQ(last.attempts, 3);
  EXPECT_TRUE(r.state.prompt_text());
  EXPECT_FALSE(r.state.summary());
}

TEST(Pipeline, DeterministicAcrossRuns) {
  ContextStore store;
  Table t = test::generated_table(3000, 5, &store);
  EchoBackend echo;
  SliceSpec spec{{{"region", "Europe"}, {"product_category", "Toys"}}, {2023, 12}, {2023, 11}};
  auto a = run_pipeline(reference_graph(), t, spec, store, echo, {});
  auto b = run_pipeline(reference_graph(), t, spec, store, echo, {});
  ASSERT_EQ(a.status, RunStatus::kCompleted);
  EXPECT_EQ(*a.state.prompt_text(), *b.state.prompt_text());
  EXPECT_EQ(a.summary, b.summary);
  EXPECT_EQ(trace_to_json(a.state.trace(), false), trace_to_json(b.state.trace(), false));
}

}  // namespace
}  // namespace tablesum
