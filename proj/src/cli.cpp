#include "tablesum/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "tablesum/csv.hpp"
#include "tablesum/datagen.hpp"
#include "tablesum/errors.hpp"
#include "tablesum/evaluation.hpp"

namespace tablesum::cli {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !in.eof()) throw ConfigError("bad value for '" + key + "': " + value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("bad boolean for '" + key + "': " + value);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

Schema load_schema(const RunConfig& config) {
  if (config.schema_path.empty()) return reference_schema();
  std::ifstream in(config.schema_path);
  if (!in) throw ConfigError("cannot open schema '" + config.schema_path + "'");
  return parse_schema(in);
}

Table load_data(const RunConfig& config, const Schema& schema, std::ostream& err) {
  if (config.data_path.empty()) throw ConfigError("no data file given (--data)");
  std::ifstream in(config.data_path);
  if (!in) throw ConfigError("cannot open data '" + config.data_path + "'");
  // One line per distinct warning; generated data carries extra columns.
  auto warn = [&err](const std::string& msg) { err << "warning: " << msg << "\n"; };
  if (config.fixture_year) return load_month_name_table(in, schema, *config.fixture_year, warn);
  return load_table(in, schema, warn);
}

ContextStore load_context(const RunConfig& config, const Table& table, std::ostream& err) {
  if (config.context_path.empty()) return {};
  std::ifstream in(config.context_path);
  if (!in) throw ConfigError("cannot open context store '" + config.context_path + "'");
  auto store = ContextStore::load(in);
  try {
    store.validate_against(table);
  } catch (const ConsistencyError& e) {
    err << "warning: " << e.what() << "\n";
  }
  return store;
}

std::unique_ptr<Backend> make_backend(const std::string& kind, const RunConfig& config) {
  if (kind == "echo") return std::make_unique<EchoBackend>();
  if (kind == "corrupt") return std::make_unique<CorruptingBackend>(config.seed);
  if (kind == "http") return std::make_unique<HttpBackend>(config.http);
  throw ConfigError("unknown backend '" + kind + "' (http, echo, corrupt)");
}

std::unique_ptr<Backend> make_judge(const RunConfig& config) {
  if (config.judge == "constant") {
    return std::make_unique<ConstantBackend>(std::to_string(config.judge_score));
  }
  if (config.judge == "http") return std::make_unique<HttpBackend>(config.http);
  throw ConfigError("unknown judge '" + config.judge + "' (constant, http)");
}

PipelineOptions pipeline_options(const RunConfig& config) {
  PipelineOptions options;
  options.epsilon = config.epsilon;
  options.prompt.profile = config.profile;
  options.max_tokens = config.max_tokens;
  options.ablation.variance_enabled = config.variance_enabled;
  options.ablation.context_enabled = config.context_enabled;
  return options;
}

SliceSpec make_spec(const Schema& schema, const std::string& region, const std::string& category,
                    const std::string& month, const std::string& previous) {
  auto current = Period::parse(month);
  if (!current) throw ConfigError("month must be YYYY-MM, got '" + month + "'");
  Period prev = prev_month(*current);
  if (!previous.empty()) {
    auto p = Period::parse(previous);
    if (!p) throw ConfigError("previous must be YYYY-MM, got '" + previous + "'");
    prev = *p;
  }
  auto category_dim = category_dimension(schema);
  if (!category_dim) throw ConfigError("schema has no product_category/category dimension");
  return SliceSpec{{{"region", region}, {*category_dim, category}}, *current, prev};
}

// Flag values collected by CLI11; applied over the config file afterwards.
struct Flags {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool no_variance = false;
  bool no_context = false;
};

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_path, "Key-value config file");
  for (const char* name : {"data", "schema", "context", "profile", "epsilon", "tau", "backend",
                           "seed", "out", "judge", "workers", "fixture-year"}) {
    cmd->add_option(std::string("--") + name, flags.values[name]);
  }
}

void resolve(const Flags& flags, CLI::App* cmd, RunConfig& config) {
  if (!flags.config_path.empty()) apply_config_file(flags.config_path, config);
  std::string overrides;
  for (const auto& [name, value] : flags.values) {
    if (cmd->get_option("--" + name)->count() == 0) continue;
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    overrides += key + " = " + value + "\n";
  }
  apply_config_text(overrides, config);
  if (flags.no_variance) config.variance_enabled = false;
  if (flags.no_context) config.context_enabled = false;
}

int cmd_gen_data(const RunConfig& config, std::size_t rows, const std::string& out_path,
                 const std::string& context_out, std::ostream& out) {
  if (out_path.empty()) throw ConfigError("gen-data needs --out <file.csv>");
  GeneratorSettings settings;
  settings.rows = rows;
  settings.seed = config.seed;
  std::ostringstream csv;
  auto store = generate_dataset(settings, csv);
  write_file(out_path, csv.str());
  if (!context_out.empty()) {
    std::ostringstream ctx;
    store.write(ctx);
    write_file(context_out, ctx.str());
  }
  out << "wrote " << rows << " rows to " << out_path << "\n";
  return kExitOk;
}

int cmd_summarize(const RunConfig& config, const std::string& region, const std::string& category,
                  const std::string& month, const std::string& previous, std::ostream& out,
                  std::ostream& err) {
  const Schema schema = load_schema(config);
  const Table table = load_data(config, schema, err);
  const ContextStore store = load_context(config, table, err);
  const SliceSpec spec = make_spec(schema, region, category, month, previous);
  auto backend = make_backend(config.backend, config);
  const auto options = pipeline_options(config);

  auto result = run_pipeline(reference_graph(), table, spec, store, *backend, options);

  const fs::path dir(config.out_dir);
  nlohmann::ordered_json trace;
  trace["slice"] = spec.id();
  trace["status"] = to_string(result.status);
  trace["trace"] = trace_to_json(result.state.trace(), true);
  if (!result.message.empty()) trace["message"] = result.message;
  write_file(dir / "trace.json", trace.dump(2) + "\n");
  if (result.state.prompt_text()) write_file(dir / "prompt.json", *result.state.prompt_text());

  switch (result.status) {
    case RunStatus::kCompleted:
      write_file(dir / "summary.txt", result.summary.value_or("") + "\n");
      out << result.summary.value_or("") << "\n";
      return kExitOk;
    case RunStatus::kSkippedEmptySlice:
      err << result.message << "\n";
      return kExitSkipped;
    default:
      err << "summarization failed: " << result.message << "\n";
      return kExitFailure;
  }
}

void write_reports(const EvalReport& report, const RunConfig& config, const std::string& stem,
                   std::ostream& out) {
  const fs::path dir(config.out_dir);
  std::ostringstream csv, text;
  write_report_csv(report, csv);
  write_report_table(report, text);
  write_file(dir / (stem + ".csv"), csv.str());
  write_file(dir / (stem + ".txt"), text.str());
  write_file(dir / (stem + ".json"), report_to_json(report).dump(2) + "\n");
  out << text.str();
}

std::vector<SliceSpec> read_specs(const std::string& path, const Schema& schema) {
  if (path.empty()) throw ConfigError("no specs file given (--specs)");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open specs file '" + path + "'");
  return load_specs(in, schema);
}

int cmd_evaluate(const RunConfig& config, const std::string& specs_path, bool ablate,
                 std::ostream& out, std::ostream& err) {
  const Schema schema = load_schema(config);
  const auto specs = read_specs(specs_path, schema);
  const Table table = load_data(config, schema, err);
  const ContextStore store = load_context(config, table, err);
  auto backend = make_backend(config.backend, config);
  auto judge = make_judge(config);

  EvalSettings settings;
  settings.pipeline = pipeline_options(config);
  settings.policy.tau = config.tau;
  settings.workers = config.workers;

  EvalReport report;
  if (ablate) {
    settings.pipeline.ablation = {};
    report = run_ablation(table, specs, {{true, true}, {true, false}, {false, true}}, store,
                          *backend, *judge, settings);
  } else {
    report = evaluate_batch(table, specs, {Method::kFlat, Method::kTemplate, Method::kAgents},
                            store, *backend, *judge, settings);
  }
  write_reports(report, config, ablate ? "ablation" : "evaluation", out);
  if (report.all_failed()) {
    err << "every evaluation cell failed; see the JSON report\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

void apply_config_text(const std::string& text, RunConfig& config) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "data") config.data_path = value;
    else if (key == "schema") config.schema_path = value;
    else if (key == "context") config.context_path = value;
    else if (key == "fixture_year") config.fixture_year = parse_number<int>(key, value);
    else if (key == "profile") {
      auto p = parse_profile(value);
      if (!p) throw ConfigError("profile must be A or B, got '" + value + "'");
      config.profile = *p;
    } else if (key == "epsilon") config.epsilon = parse_number<double>(key, value);
    else if (key == "tau") config.tau = parse_number<double>(key, value);
    else if (key == "backend") config.backend = value;
    else if (key == "judge") config.judge = value;
    else if (key == "judge_score") config.judge_score = parse_number<int>(key, value);
    else if (key == "seed") config.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "out") config.out_dir = value;
    else if (key == "variance_enabled") config.variance_enabled = parse_bool(key, value);
    else if (key == "context_enabled") config.context_enabled = parse_bool(key, value);
    else if (key == "max_tokens") config.max_tokens = parse_number<int>(key, value);
    else if (key == "workers") config.workers = parse_number<unsigned>(key, value);
    else if (key == "endpoint") config.http.endpoint = value;
    else if (key == "model") config.http.model = value;
    else if (key == "api_key_env") config.http.api_key_env = value;
    else if (key == "timeout_seconds") config.http.timeout_seconds = parse_number<double>(key, value);
    else if (key == "max_retries") config.http.max_retries = parse_number<int>(key, value);
    else if (key == "backoff_ms") config.http.backoff_base_ms = parse_number<int>(key, value);
    else if (key.rfind("param.", 0) == 0) {
      auto parsed = nlohmann::json::parse(value, nullptr, false);
      config.http.extra_params[key.substr(6)] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (!(config.epsilon >= 0)) throw ConfigError("epsilon must be >= 0");
  if (!(config.tau >= 0)) throw ConfigError("tau must be >= 0");
  if (config.judge_score < 1 || config.judge_score > 5) throw ConfigError("judge_score must be 1..5");
}

void apply_config_file(const std::string& path, RunConfig& config) {
  apply_config_text(read_file(path), config);
}

std::vector<SliceSpec> load_specs(std::istream& in, const Schema& schema) {
  CsvReader reader(in);
  auto header = reader.next();
  if (!header) throw ConfigError("specs file is empty");
  auto column = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
    for (const char* name : names) {
      for (std::size_t i = 0; i < header->fields.size(); ++i) {
        if (header->fields[i] == name) return i;
      }
    }
    return std::nullopt;
  };
  auto region = column({"region"});
  auto category = column({"category", "product_category"});
  auto month = column({"month"});
  auto previous = column({"previous"});
  if (!region || !category || !month) {
    throw ConfigError("specs header needs region, category, month");
  }
  std::vector<SliceSpec> specs;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != header->fields.size()) {
      throw ParseError(rec->line, "specs row has wrong field count");
    }
    specs.push_back(make_spec(schema, rec->fields[*region], rec->fields[*category],
                              rec->fields[*month], previous ? rec->fields[*previous] : ""));
  }
  if (specs.empty()) throw ConfigError("specs file has no rows");
  return specs;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grounded summaries of dimensional sales tables"};
  app.require_subcommand(1);

  Flags flags;
  std::size_t rows = 1000;
  std::string context_out, region, category, month, previous, specs_path;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic retail sales CSV");
  gen->add_option("--rows", rows, "Data rows to generate")->check(CLI::PositiveNumber);
  gen->add_option("--seed", flags.values["seed"]);
  gen->add_option("--out", flags.values["out"], "Output CSV path")->required();
  gen->add_option("--context", context_out, "Also write the matching context store here");
  gen->add_option("--config", flags.config_path);

  auto* sum = app.add_subcommand("summarize", "Summarize one slice");
  add_common(sum, flags);
  sum->add_option("--region", region)->required();
  sum->add_option("--category", category)->required();
  sum->add_option("--month", month, "Current period, YYYY-MM")->required();
  sum->add_option("--previous", previous, "Comparison period (default: month before)");
  sum->add_flag("--no-variance", flags.no_variance);
  sum->add_flag("--no-context", flags.no_context);

  auto* eval = app.add_subcommand("evaluate", "Score flat, template, and agent summaries");
  add_common(eval, flags);
  eval->add_option("--specs", specs_path, "CSV of region,category,month")->required();
  eval->add_flag("--no-variance", flags.no_variance);
  eval->add_flag("--no-context", flags.no_context);

  auto* abl = app.add_subcommand("ablate", "Score the agent pipeline with agents disabled");
  add_common(abl, flags);
  abl->add_option("--specs", specs_path, "CSV of region,category,month")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    RunConfig config;
    if (gen->parsed()) {
      if (!flags.config_path.empty()) apply_config_file(flags.config_path, config);
      if (gen->get_option("--seed")->count()) {
        config.seed = parse_number<std::uint64_t>("seed", flags.values["seed"]);
      }
      return cmd_gen_data(config, rows, flags.values["out"], context_out, out);
    }
    if (sum->parsed()) {
      resolve(flags, sum, config);
      return cmd_summarize(config, region, category, month, previous, out, err);
    }
    if (eval->parsed()) {
      resolve(flags, eval, config);
      return cmd_evaluate(config, specs_path, false, out, err);
    }
    resolve(flags, abl, config);
    return cmd_evaluate(config, specs_path, true, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace tablesum::cli
