#include <cmath>
#include <random>
#include <regex>
#include <sstream>
#include <variant>
#include <vector>

#include "tablesum/backend.hpp"
#include "tablesum/errors.hpp"
#include "tablesum/table.hpp"

namespace tablesum {
namespace {

struct NumberSlot {
  double value;
  std::string text;
  bool percent;
};

using Piece = std::variant<std::string, NumberSlot>;

NumberSlot json_number(const nlohmann::json& v) {
  if (!v.is_number()) throw EchoError("metric value is not a number");
  return {v.get<double>(), v.dump(), false};
}

std::vector<Piece> echo_json(const nlohmann::json& prompt) {
  const auto& metrics = prompt["metrics"];
  std::vector<Piece> out;
  bool first = true;
  for (const auto& [name, m] : metrics.items()) {
    if (!m.is_object() || !m.contains("current") || !m.contains("previous")) {
      throw EchoError("metric '" + name + "' lacks current/previous");
    }
    out.emplace_back(std::string(first ? "" : " ") + name + ": current ");
    first = false;
    out.emplace_back(json_number(m["current"]));
    out.emplace_back(std::string(", previous "));
    out.emplace_back(json_number(m["previous"]));
    if (m.contains("delta_percent")) {
      if (!m["delta_percent"].is_number()) throw EchoError("delta_percent is not a number");
      const double pct = m["delta_percent"].get<double>() * 100.0;
      std::string text = format_decimal(pct, 2);
      if (pct > 0 && text != "0") text = "+" + text;
      out.emplace_back(std::string(", change "));
      out.emplace_back(NumberSlot{pct, text, true});
      out.emplace_back(std::string("%"));
    }
    out.emplace_back(std::string("."));
  }
  return out;
}

// Flat-baseline rows: "<label> | MM/YYYY | Name: value, Name: value".
std::vector<Piece> echo_flat(const std::string& prompt) {
  static const std::regex kRow(R"(^(.+?) \| (\d{2}/\d{4}) \| (.+)$)");
  static const std::regex kCell(R"(([^:,]+): (-?\d+(?:\.\d+)?))");
  std::vector<Piece> out;
  std::istringstream in(prompt);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::smatch row;
    if (!std::regex_match(line, row, kRow)) continue;
    out.emplace_back(std::string(first ? "" : " ") + row[1].str() + " " + row[2].str() + ":");
    first = false;
    const std::string cells = row[3].str();
    bool first_cell = true;
    for (auto it = std::sregex_iterator(cells.begin(), cells.end(), kCell);
         it != std::sregex_iterator(); ++it) {
      std::string label = (*it)[1].str();
      while (!label.empty() && label.front() == ' ') label.erase(0, 1);
      out.emplace_back(std::string(first_cell ? " " : ", ") + label + " ");
      first_cell = false;
      out.emplace_back(NumberSlot{std::stod((*it)[2].str()), (*it)[2].str(), false});
    }
    out.emplace_back(std::string("."));
  }
  return out;
}

std::vector<Piece> echo_pieces(const std::string& prompt) {
  if (prompt.empty()) throw EchoError("empty prompt");
  auto j = nlohmann::json::parse(prompt, nullptr, false);
  if (!j.is_discarded()) {
    if (!j.is_object() || !j.contains("metrics") || !j["metrics"].is_object()) {
      throw EchoError("prompt JSON has no metrics object");
    }
    return echo_json(j);
  }
  if (prompt.rfind("Table:", 0) == 0) return echo_flat(prompt);
  throw EchoError("prompt is neither a structured envelope nor a flat table");
}

std::string render(const std::vector<Piece>& pieces) {
  std::string out;
  for (const auto& p : pieces) {
    if (const auto* s = std::get_if<std::string>(&p)) out += *s;
    else out += std::get<NumberSlot>(p).text;
  }
  return out;
}

}  // namespace

std::string echo_metrics(const std::string& prompt) { return render(echo_pieces(prompt)); }

std::string corrupt_metrics(const std::string& prompt, std::uint64_t seed) {
  auto pieces = echo_pieces(prompt);
  std::vector<NumberSlot*> candidates;
  for (auto& p : pieces) {
    if (auto* n = std::get_if<NumberSlot>(&p); n && n->value != 0) candidates.push_back(n);
  }
  if (candidates.empty()) return render(pieces);
  std::mt19937_64 rng(seed);
  NumberSlot& target = *candidates[rng() % candidates.size()];
  const double scaled = target.value * 1.5;
  std::string text = format_decimal(scaled, 4);
  if (target.percent && scaled > 0) text = "+" + text;
  target = {scaled, text, target.percent};
  return render(pieces);
}

GenerationResponse EchoBackend::generate(const GenerationRequest& request) {
  return {echo_metrics(request.prompt)};
}

GenerationResponse CorruptingBackend::generate(const GenerationRequest& request) {
  return {corrupt_metrics(request.prompt, seed_)};
}

}  // namespace tablesum
