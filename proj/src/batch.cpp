#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <thread>

#include "tablesum/csv.hpp"
#include "tablesum/errors.hpp"
#include "tablesum/evaluation.hpp"
#include "tablesum/prompt.hpp"

namespace tablesum {
namespace {

// Produces the summary for one cell, filling cell.prompt where a prompt
// exists. Returns nullopt when the method itself skipped the slice.
using Producer =
    std::function<std::optional<std::string>(std::size_t row, const SliceSpec&, CellResult&)>;

void score(CellResult& cell, const std::string& summary, const GroundTruth& truth,
           const SliceSpec& spec, Backend& judge, const EvalSettings& settings) {
  cell.summary = summary;
  auto facts = extract_numeric_facts(summary);
  auto f = faithfulness(facts, truth, settings.tolerances);
  auto c = coverage(summary, truth, settings.policy, settings.tolerances);
  cell.scores.faithfulness = f.score;
  cell.faithfulness_vacuous = f.vacuous;
  cell.flagged = std::move(f.unaligned);
  cell.scores.coverage = c.score;
  cell.coverage_vacuous = c.vacuous;
  try {
    cell.scores.relevance = relevance(summary, truth, spec, judge);
  } catch (const std::exception& e) {
    cell.relevance_invalid = true;
    cell.relevance_error = e.what();
  }
}

void tally(EvalReport& report, const std::vector<std::string>& labels, std::size_t n_specs) {
  report.rows.clear();
  for (std::size_t row = 0; row < labels.size(); ++row) {
    MethodRow mr;
    mr.label = labels[row];
    double f = 0, c = 0, r = 0;
    std::size_t judged = 0;
    for (std::size_t s = 0; s < n_specs; ++s) {
      const auto& cell = report.cells[row * n_specs + s];
      switch (cell.status) {
        case CellStatus::kSkipped: ++mr.skipped; continue;
        case CellStatus::kFailed: ++mr.failed; continue;
        case CellStatus::kOk: break;
      }
      ++mr.ok;
      f += cell.scores.faithfulness;
      c += cell.scores.coverage;
      if (cell.scores.relevance) {
        r += *cell.scores.relevance;
        ++judged;
      }
    }
    if (mr.ok) {
      mr.faithfulness = f / static_cast<double>(mr.ok);
      mr.coverage = c / static_cast<double>(mr.ok);
    }
    if (judged) mr.relevance = r / static_cast<double>(judged);
    report.rows.push_back(std::move(mr));
  }
}

EvalReport run_grid(std::string title, const std::vector<std::string>& labels,
                    const Table& table, const std::vector<SliceSpec>& specs, Backend& judge,
                    const EvalSettings& settings, const Producer& produce) {
  if (specs.empty()) throw ConfigError("evaluation needs at least one slice spec");

  EvalReport report;
  report.title = std::move(title);
  const std::size_t n_specs = specs.size();
  report.cells.resize(labels.size() * n_specs);

  auto run_cell = [&](std::size_t index) {
    const std::size_t row = index / n_specs;
    const SliceSpec& spec = specs[index % n_specs];
    CellResult& cell = report.cells[index];
    cell.scores.method = labels[row];
    cell.scores.slice = spec.id();
    try {
      auto truth = ground_truth(table, spec, settings.pipeline.epsilon);
      if (!truth) {
        cell.status = CellStatus::kSkipped;
        cell.error = "empty slice";
        return;
      }
      auto summary = produce(row, spec, cell);
      if (!summary) {
        cell.status = CellStatus::kSkipped;
        return;
      }
      score(cell, *summary, *truth, spec, judge, settings);
      cell.status = CellStatus::kOk;
    } catch (const std::exception& e) {
      cell.status = CellStatus::kFailed;
      cell.error = e.what();
    }
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(settings.workers, static_cast<unsigned>(report.cells.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < report.cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < report.cells.size(); i = next++) run_cell(i);
      });
    }
  }

  tally(report, labels, n_specs);
  return report;
}

std::optional<std::string> run_agents(const Table& table, const SliceSpec& spec,
                                      const ContextStore& store, Backend& backend,
                                      const PipelineOptions& options, CellResult& cell) {
  static const PipelineGraph kGraph = reference_graph();
  auto result = run_pipeline(kGraph, table, spec, store, backend, options);
  if (result.state.prompt_text()) cell.prompt = *result.state.prompt_text();
  switch (result.status) {
    case RunStatus::kCompleted:
      if (!result.summary) throw ConsistencyError("pipeline completed without a summary");
      return result.summary;
    case RunStatus::kSkippedEmptySlice: return std::nullopt;
    default: throw Error(result.message);
  }
}

std::string percent(double fraction) { return format_decimal(fraction * 100.0, 1); }

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kAgents: return "agents";
    case Method::kFlat: return "flat";
    case Method::kTemplate: return "template";
  }
  return "agents";
}

std::optional<Method> parse_method(std::string_view text) {
  for (auto m : {Method::kAgents, Method::kFlat, Method::kTemplate}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::string to_string(CellStatus status) {
  switch (status) {
    case CellStatus::kOk: return "ok";
    case CellStatus::kSkipped: return "skipped";
    case CellStatus::kFailed: return "failed";
  }
  return "failed";
}

bool EvalReport::all_failed() const {
  return !cells.empty() && std::all_of(cells.begin(), cells.end(), [](const CellResult& c) {
    return c.status == CellStatus::kFailed;
  });
}

std::optional<GroundTruth> ground_truth(const Table& table, const SliceSpec& spec,
                                        double epsilon) {
  auto pair = slice(table, spec);
  if (pair.empty()) return std::nullopt;
  auto current = aggregate(table, pair.current, spec.current);
  auto previous = aggregate(table, pair.previous, spec.previous);
  return GroundTruth{compute_all_deltas(current, previous, epsilon)};
}

EvalReport evaluate_batch(const Table& table, const std::vector<SliceSpec>& specs,
                          const std::vector<Method>& methods, const ContextStore& store,
                          Backend& backend, Backend& judge, const EvalSettings& settings) {
  std::vector<std::string> labels;
  for (auto m : methods) labels.push_back(to_string(m));
  return run_grid(
      "Comparison across summarization methods", labels, table, specs, judge, settings,
      [&](std::size_t row, const SliceSpec& spec, CellResult& cell) -> std::optional<std::string> {
        switch (methods[row]) {
          case Method::kAgents:
            return run_agents(table, spec, store, backend, settings.pipeline, cell);
          case Method::kFlat: {
            cell.prompt = build_flat_prompt(table, slice(table, spec), spec);
            return backend.generate({cell.prompt, settings.pipeline.max_tokens}).text;
          }
          case Method::kTemplate: {
            auto truth = ground_truth(table, spec, settings.pipeline.epsilon);
            return template_nlg(truth->metrics, spec);
          }
        }
        return std::nullopt;
      });
}

EvalReport run_ablation(const Table& table, const std::vector<SliceSpec>& specs,
                        const std::vector<AblationConfig>& configs, const ContextStore& store,
                        Backend& backend, Backend& judge, const EvalSettings& settings) {
  std::vector<std::string> labels;
  for (const auto& c : configs) labels.push_back(c.label());
  auto report = run_grid(
      "Ablation study", labels, table, specs, judge, settings,
      [&](std::size_t row, const SliceSpec& spec, CellResult& cell) {
        PipelineOptions options = settings.pipeline;
        options.ablation = configs[row];
        return run_agents(table, spec, store, backend, options, cell);
      });

  const std::size_t n_specs = specs.size();
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    auto& cell = report.cells[i];
    if (cell.prompt.empty()) continue;
    const auto& config = configs[i / n_specs];
    bool ok = true;
    if (!config.variance_enabled && cell.prompt.find("delta_percent") != std::string::npos) {
      ok = false;
    }
    if (!config.context_enabled && cell.prompt.find("context_signals") != std::string::npos) {
      ok = false;
    }
    cell.structure_ok = ok;
    if (!ok && cell.status == CellStatus::kOk) {
      cell.status = CellStatus::kFailed;
      cell.error = "prompt contains fields of a disabled agent";
    }
  }
  tally(report, labels, n_specs);
  return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "method,faithfulness_percent,relevance,coverage_percent,ok,skipped,failed\n";
  for (const auto& row : report.rows) {
    out << csv_join({row.label, percent(row.faithfulness),
                     row.relevance ? format_decimal(*row.relevance, 2) : "",
                     percent(row.coverage), std::to_string(row.ok), std::to_string(row.skipped),
                     std::to_string(row.failed)})
        << "\n";
  }
}

void write_report_table(const EvalReport& report, std::ostream& out) {
  std::size_t width = 6;
  for (const auto& row : report.rows) width = std::max(width, row.label.size());
  char buf[256];
  out << report.title << "\n";
  std::snprintf(buf, sizeof buf, "%-*s  %7s  %7s  %7s\n", static_cast<int>(width), "Method",
                "F (%)", "R (5pt)", "C (%)");
  out << buf;
  for (const auto& row : report.rows) {
    std::string r = row.relevance ? format_decimal(*row.relevance, 2) : "n/a";
    std::snprintf(buf, sizeof buf, "%-*s  %7.1f  %7s  %7.1f\n", static_cast<int>(width),
                  row.label.c_str(), row.faithfulness * 100.0, r.c_str(), row.coverage * 100.0);
    out << buf;
  }
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["title"] = report.title;
  auto& rows = j["rows"];
  rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["method"] = row.label;
    r["faithfulness"] = row.faithfulness;
    r["relevance"] = row.relevance ? nlohmann::ordered_json(*row.relevance) : nullptr;
    r["coverage"] = row.coverage;
    r["ok"] = row.ok;
    r["skipped"] = row.skipped;
    r["failed"] = row.failed;
    rows.push_back(std::move(r));
  }
  auto& cells = j["cells"];
  cells = nlohmann::ordered_json::array();
  for (const auto& cell : report.cells) {
    nlohmann::ordered_json c;
    c["method"] = cell.scores.method;
    c["slice"] = cell.scores.slice;
    c["status"] = to_string(cell.status);
    if (cell.status == CellStatus::kOk) {
      c["faithfulness"] = cell.scores.faithfulness;
      c["faithfulness_vacuous"] = cell.faithfulness_vacuous;
      c["relevance"] =
          cell.scores.relevance ? nlohmann::ordered_json(*cell.scores.relevance) : nullptr;
      if (cell.relevance_invalid) c["relevance_error"] = cell.relevance_error;
      c["coverage"] = cell.scores.coverage;
      c["coverage_vacuous"] = cell.coverage_vacuous;
      auto& flagged = c["flagged_facts"];
      flagged = nlohmann::ordered_json::array();
      for (const auto& f : cell.flagged) {
        flagged.push_back({{"span", f.span},
                           {"value", f.value},
                           {"form", to_string(f.form)},
                           {"sign", to_string(f.sign)}});
      }
    }
    if (cell.structure_ok) c["structure_ok"] = *cell.structure_ok;
    if (!cell.error.empty()) c["error"] = cell.error;
    if (!cell.summary.empty()) c["summary"] = cell.summary;
    if (!cell.prompt.empty()) c["prompt"] = cell.prompt;
    cells.push_back(std::move(c));
  }
  return j;
}

}  // namespace tablesum
