#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tablesum/backend.hpp"
#include "tablesum/context_store.hpp"
#include "tablesum/pipeline.hpp"
#include "tablesum/variance.hpp"

namespace tablesum {

enum class FactForm { kAbsolute, kPercent };
enum class SignContext { kIncrease, kDecrease, kNeutral };

std::string to_string(FactForm form);
std::string to_string(SignContext sign);

/// A number found in generated text.
struct NumericFact {
  std::string span;
  std::size_t begin = 0;  // byte offsets into the summary
  std::size_t end = 0;
  double value = 0.0;  // percents hold the magnitude; direction lives in `sign`
  FactForm form = FactForm::kAbsolute;
  SignContext sign = SignContext::kNeutral;
};

/// Decimal and percent tokens, thousands separators allowed. Calendar
/// tokens (YYYY-MM, YYYY-MM-DD, MM/YYYY) and digits glued to words are not
/// facts. Sign comes from an explicit +/- or the nearest direction word
/// within the four preceding words of the same sentence.
std::vector<NumericFact> extract_numeric_facts(const std::string& summary);

/// Per-metric truth for one slice: mirrors the MetricDelta list.
struct GroundTruth {
  std::vector<MetricDelta> metrics;
};

struct Tolerances {
  double absolute_relative = 0.005;  // 0.5% of the true value
  double percent_points = 0.5;
  double slack = 1e-9;  // float noise allowance on both bounds
};

struct KeyDeltaPolicy {
  double tau = 0.05;
};

bool aligns_absolute(const NumericFact& fact, double truth, const Tolerances& tol);
bool aligns_percent(const NumericFact& fact, const MetricDelta& metric, const Tolerances& tol);

struct FaithfulnessResult {
  double score = 1.0;
  std::size_t aligned = 0;
  std::size_t total = 0;
  bool vacuous = false;  // no facts at all
  std::vector<NumericFact> unaligned;
};

/// Share of facts that match some ground-truth value. Absolute facts match a
/// current or previous value; percent facts match some |delta|*100 with a
/// compatible sign.
FaithfulnessResult faithfulness(const std::vector<NumericFact>& facts, const GroundTruth& truth,
                                const Tolerances& tol = {});

struct CoverageResult {
  double score = 1.0;
  std::size_t key_deltas = 0;
  std::size_t mentioned = 0;
  bool vacuous = false;  // no key deltas
  std::vector<std::string> mentioned_metrics;
  std::vector<std::string> missed_metrics;
};

/// Share of key deltas (|delta| >= tau) the summary mentions: an aligned
/// percent fact for that metric, or, for a zero-baseline metric, its current
/// value.
CoverageResult coverage(const std::string& summary, const GroundTruth& truth,
                        const KeyDeltaPolicy& policy = {}, const Tolerances& tol = {});

/// Fixed rubric used for every relevance judgement.
extern const char* const kRelevanceRubric;

std::string build_judge_prompt(const std::string& summary, const GroundTruth& truth,
                               const SliceSpec& spec);

/// First integer in the reply; must be 1..5 (JudgeFormatError otherwise).
int parse_judge_score(const std::string& reply);

/// One judge call. Throws JudgeFormatError on an unusable reply.
int relevance(const std::string& summary, const GroundTruth& truth, const SliceSpec& spec,
              Backend& judge);

enum class Method { kAgents, kFlat, kTemplate };
std::string to_string(Method method);
std::optional<Method> parse_method(std::string_view text);

enum class CellStatus { kOk, kSkipped, kFailed };
std::string to_string(CellStatus status);

struct EvalScores {
  double faithfulness = 0.0;
  std::optional<int> relevance;  // absent when the judge reply was unusable
  double coverage = 0.0;
  std::string method;
  std::string slice;
};

struct CellResult {
  EvalScores scores;
  CellStatus status = CellStatus::kOk;
  bool faithfulness_vacuous = false;
  bool coverage_vacuous = false;
  bool relevance_invalid = false;
  std::string relevance_error;
  std::vector<NumericFact> flagged;  // unaligned facts
  std::string prompt;
  std::string summary;
  std::string error;
  std::optional<bool> structure_ok;  // ablation prompt-field checks
};

struct MethodRow {
  std::string label;
  double faithfulness = 0.0;  // means over ok cells
  std::optional<double> relevance;
  double coverage = 0.0;
  std::size_t ok = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

struct EvalReport {
  std::string title;
  std::vector<MethodRow> rows;
  std::vector<CellResult> cells;  // row-major: rows[i] owns cells [i*specs, (i+1)*specs)

  bool all_failed() const;
};

struct EvalSettings {
  PipelineOptions pipeline;
  KeyDeltaPolicy policy;
  Tolerances tolerances;
  unsigned workers = 1;
};

/// Truth for `spec` computed straight from the table, or nullopt when both
/// periods are empty.
std::optional<GroundTruth> ground_truth(const Table& table, const SliceSpec& spec,
                                        double epsilon = kDefaultEpsilon);

/// Runs every (method, spec) cell and averages per method. Per-cell failures
/// are recorded and do not stop the batch. Throws ConfigError on no specs.
EvalReport evaluate_batch(const Table& table, const std::vector<SliceSpec>& specs,
                          const std::vector<Method>& methods, const ContextStore& store,
                          Backend& backend, Backend& judge, const EvalSettings& settings);

/// Agents pipeline under each ablation config, plus prompt structure checks:
/// no delta_percent without variance, no context_signals without context.
EvalReport run_ablation(const Table& table, const std::vector<SliceSpec>& specs,
                        const std::vector<AblationConfig>& configs, const ContextStore& store,
                        Backend& backend, Backend& judge, const EvalSettings& settings);

void write_report_csv(const EvalReport& report, std::ostream& out);
/// Aligned columns: Method, F (%), R (5pt), C (%).
void write_report_table(const EvalReport& report, std::ostream& out);
nlohmann::ordered_json report_to_json(const EvalReport& report);

}  // namespace tablesum
