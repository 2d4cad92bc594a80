#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tablesum/backend.hpp"
#include "tablesum/pipeline.hpp"

namespace tablesum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitSkipped = 2;

/// Settings shared by every subcommand. Precedence: flags, then the config
/// file, then these defaults. Environment variables only seed the backend
/// endpoint, model, and auth token.
struct RunConfig {
  std::string data_path;
  std::string schema_path;   // empty: reference schema
  std::string context_path;  // empty: no context signals
  std::optional<int> fixture_year;  // month-name date cells
  PromptProfile profile = PromptProfile::kB;
  double epsilon = kDefaultEpsilon;
  double tau = 0.05;
  std::string backend = "echo";  // http | echo | corrupt
  std::string judge = "constant";  // constant | http
  int judge_score = 3;
  std::uint64_t seed = 42;
  std::string out_dir = "tablesum-out";
  bool variance_enabled = true;
  bool context_enabled = true;
  int max_tokens = 512;
  unsigned workers = 1;
  BackendConfig http = BackendConfig::from_env();
};

/// Applies "key = value" lines ('#' comments) onto `config`.
/// Throws ConfigError on an unknown key or bad value.
void apply_config_text(const std::string& text, RunConfig& config);
void apply_config_file(const std::string& path, RunConfig& config);

/// Reads a specs CSV (header region,category|product_category,month[,previous]).
std::vector<SliceSpec> load_specs(std::istream& in, const Schema& schema);

/// Entry point for the command-line tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tablesum::cli
