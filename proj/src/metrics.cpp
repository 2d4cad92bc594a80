#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <string_view>
#include <unordered_set>

#include "tablesum/errors.hpp"
#include "tablesum/evaluation.hpp"

namespace tablesum {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

std::size_t digit_run(const std::string& s, std::size_t i) {
  std::size_t j = i;
  while (j < s.size() && is_digit(s[j])) ++j;
  return j - i;
}

// Length of a calendar token starting at i, or 0.
std::size_t calendar_token(const std::string& s, std::size_t i) {
  const std::size_t lead = digit_run(s, i);
  std::size_t end = 0;
  if (lead == 4 && i + 4 < s.size() && s[i + 4] == '-' && digit_run(s, i + 5) == 2) {
    end = i + 7;
    if (end < s.size() && s[end] == '-' && digit_run(s, end + 1) == 2) end += 3;
  } else if ((lead == 1 || lead == 2) && i + lead < s.size() && s[i + lead] == '/' &&
             digit_run(s, i + lead + 1) == 4) {
    end = i + lead + 5;
  }
  if (end == 0) return 0;
  if (end < s.size() && (is_digit(s[end]) || is_word_char(s[end]))) return 0;
  return end - i;
}

const std::unordered_set<std::string_view>& increase_words() {
  static const std::unordered_set<std::string_view> kWords = {
      "increase", "increased", "increases", "increasing", "rose", "rise",   "rises",
      "rising",   "grew",      "grow",      "grows",      "growth", "up",   "gain",
      "gained",   "gains",     "climbed",   "jumped",     "higher"};
  return kWords;
}

const std::unordered_set<std::string_view>& decrease_words() {
  static const std::unordered_set<std::string_view> kWords = {
      "decrease", "decreased", "decreases", "decreasing", "fell",    "fall",
      "falls",    "falling",   "declined",  "decline",    "declines", "declining",
      "down",     "drop",      "dropped",   "drops",      "lower",    "shrank"};
  return kWords;
}

SignContext sign_from_words(const std::string& s, std::size_t before) {
  std::size_t pos = before;
  for (int words = 0; words < 4; ++words) {
    while (pos > 0 && std::isspace(static_cast<unsigned char>(s[pos - 1]))) --pos;
    if (pos == 0) break;
    std::size_t end = pos;
    while (pos > 0 && !std::isspace(static_cast<unsigned char>(s[pos - 1]))) --pos;
    std::string_view raw(s.data() + pos, end - pos);
    const char last = raw.back();
    if (last == '.' || last == '!' || last == '?' || last == ';') {
      // The previous sentence ends here.
      break;
    }
    std::string word;
    for (char c : raw) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    if (increase_words().contains(word)) return SignContext::kIncrease;
    if (decrease_words().contains(word)) return SignContext::kDecrease;
  }
  return SignContext::kNeutral;
}

bool starts_with_word(const std::string& s, std::size_t i, std::string_view word) {
  if (s.compare(i, word.size(), word) != 0) return false;
  const std::size_t after = i + word.size();
  return after >= s.size() || !is_word_char(s[after]);
}

}  // namespace

std::string to_string(FactForm form) {
  return form == FactForm::kPercent ? "percent" : "absolute";
}

std::string to_string(SignContext sign) {
  switch (sign) {
    case SignContext::kIncrease: return "increase";
    case SignContext::kDecrease: return "decrease";
    case SignContext::kNeutral: return "neutral";
  }
  return "neutral";
}

std::vector<NumericFact> extract_numeric_facts(const std::string& s) {
  std::vector<NumericFact> facts;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_digit(s[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    const bool hyphen_glued = start > 1 && (s[start - 1] == '-' || s[start - 1] == '+') &&
                              (is_word_char(s[start - 2]) || is_digit(s[start - 2]));
    if (hyphen_glued || (start > 0 && (is_word_char(s[start - 1]) || is_digit(s[start - 1])))) {
      while (i < s.size() && (is_digit(s[i]) || is_word_char(s[i]))) ++i;
      continue;
    }
    if (std::size_t len = calendar_token(s, i)) {
      i += len;
      continue;
    }

    std::string digits;
    std::size_t j = i;
    const std::size_t lead = digit_run(s, j);
    digits.append(s, j, lead);
    j += lead;
    if (lead <= 3) {
      // Thousands groups: ",ddd" not followed by another digit.
      while (j < s.size() && s[j] == ',' && digit_run(s, j + 1) == 3) {
        digits.append(s, j + 1, 3);
        j += 4;
      }
    }
    if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
      const std::size_t frac = digit_run(s, j + 1);
      digits.push_back('.');
      digits.append(s, j + 1, frac);
      j += 1 + frac;
    }
    if (j < s.size() && is_word_char(s[j])) {
      // "10k", "3rd": not a plain quantity.
      while (j < s.size() && (is_digit(s[j]) || is_word_char(s[j]))) ++j;
      i = j;
      continue;
    }

    NumericFact fact;
    fact.value = std::stod(digits);
    std::size_t end = j;
    if (end < s.size() && s[end] == '%') {
      fact.form = FactForm::kPercent;
      ++end;
    } else if (end + 1 < s.size() && s[end] == ' ' && s[end + 1] == '%') {
      fact.form = FactForm::kPercent;
      end += 2;
    } else if (end + 1 < s.size() && s[end] == ' ' &&
               (starts_with_word(s, end + 1, "percent") || starts_with_word(s, end + 1, "pct"))) {
      fact.form = FactForm::kPercent;
      end += 1 + (starts_with_word(s, end + 1, "percent") ? 7 : 3);
    }

    std::size_t begin = start;
    std::optional<char> explicit_sign;
    if (start > 0 && (s[start - 1] == '-' || s[start - 1] == '+')) {
      const bool boundary = start == 1 || std::isspace(static_cast<unsigned char>(s[start - 2])) ||
                            s[start - 2] == '(' || s[start - 2] == ':';
      if (boundary) {
        explicit_sign = s[start - 1];
        begin = start - 1;
      }
    }
    if (explicit_sign) {
      fact.sign = *explicit_sign == '-' ? SignContext::kDecrease : SignContext::kIncrease;
      if (fact.form == FactForm::kAbsolute && *explicit_sign == '-') fact.value = -fact.value;
    } else {
      fact.sign = sign_from_words(s, begin);
    }
    fact.begin = begin;
    fact.end = end;
    fact.span = s.substr(begin, end - begin);
    facts.push_back(std::move(fact));
    i = end;
  }
  return facts;
}

bool aligns_absolute(const NumericFact& fact, double truth, const Tolerances& tol) {
  if (fact.form != FactForm::kAbsolute) return false;
  return std::abs(fact.value - truth) <= tol.absolute_relative * std::abs(truth) + tol.slack;
}

bool aligns_percent(const NumericFact& fact, const MetricDelta& metric, const Tolerances& tol) {
  if (fact.form != FactForm::kPercent) return false;
  const double truth = std::abs(metric.delta) * 100.0;
  if (std::abs(fact.value - truth) > tol.percent_points + tol.slack) return false;
  switch (fact.sign) {
    case SignContext::kNeutral: return true;
    case SignContext::kIncrease: return metric.delta >= 0;
    case SignContext::kDecrease: return metric.delta <= 0;
  }
  return false;
}

FaithfulnessResult faithfulness(const std::vector<NumericFact>& facts, const GroundTruth& truth,
                                const Tolerances& tol) {
  FaithfulnessResult out;
  out.total = facts.size();
  for (const auto& fact : facts) {
    bool ok = false;
    for (const auto& m : truth.metrics) {
      if (aligns_absolute(fact, m.current, tol) || aligns_absolute(fact, m.previous, tol) ||
          aligns_percent(fact, m, tol)) {
        ok = true;
        break;
      }
    }
    if (ok) ++out.aligned;
    else out.unaligned.push_back(fact);
  }
  if (out.total == 0) {
    out.vacuous = true;
    out.score = 1.0;
  } else {
    out.score = static_cast<double>(out.aligned) / static_cast<double>(out.total);
  }
  return out;
}

CoverageResult coverage(const std::string& summary, const GroundTruth& truth,
                        const KeyDeltaPolicy& policy, const Tolerances& tol) {
  const auto facts = extract_numeric_facts(summary);
  CoverageResult out;
  for (const auto& m : truth.metrics) {
    if (std::abs(m.delta) < policy.tau) continue;
    ++out.key_deltas;
    bool mentioned = std::any_of(facts.begin(), facts.end(), [&](const NumericFact& f) {
      return aligns_percent(f, m, tol);
    });
    if (!mentioned && m.baseline_zero) {
      mentioned = std::any_of(facts.begin(), facts.end(), [&](const NumericFact& f) {
        return aligns_absolute(f, m.current, tol);
      });
    }
    if (mentioned) {
      ++out.mentioned;
      out.mentioned_metrics.push_back(m.measure);
    } else {
      out.missed_metrics.push_back(m.measure);
    }
  }
  if (out.key_deltas == 0) {
    out.vacuous = true;
    out.score = 1.0;
  } else {
    out.score = static_cast<double>(out.mentioned) / static_cast<double>(out.key_deltas);
  }
  return out;
}

const char* const kRelevanceRubric =
    "You are reviewing an automatically generated business summary of one slice of a\n"
    "sales table. Rate how useful its insights are to a business decision maker.\n"
    "\n"
    "5 - Names the most important changes, quantifies them, and explains what they mean.\n"
    "4 - Covers the important changes with numbers but little interpretation.\n"
    "3 - Mentions some changes; misses or misranks an important one.\n"
    "2 - Mostly generic statements with little connection to the data.\n"
    "1 - Irrelevant, misleading, or empty.\n"
    "\n"
    "Reply with a single integer from 1 to 5 and nothing else.\n";

std::string build_judge_prompt(const std::string& summary, const GroundTruth& truth,
                               const SliceSpec& spec) {
  nlohmann::ordered_json facts;
  facts["slice"] = spec.id();
  facts["time_period"] = spec.current.to_string() + " vs " + spec.previous.to_string();
  auto& metrics = facts["metrics"];
  metrics = nlohmann::ordered_json::object();
  for (const auto& m : truth.metrics) {
    metrics[m.measure] = {{"current", m.current}, {"previous", m.previous}, {"delta", m.delta}};
  }
  std::string out = kRelevanceRubric;
  out += "\nSlice facts:\n";
  out += facts.dump(2);
  out += "\n\nSummary:\n";
  out += summary;
  out += "\n";
  return out;
}

int parse_judge_score(const std::string& reply) {
  static const std::regex kInt(R"((\d+))");
  std::smatch m;
  if (!std::regex_search(reply, m, kInt)) {
    throw JudgeFormatError("judge reply has no score: '" + reply + "'");
  }
  const std::string digits = m[1].str();
  if (digits.size() > 1 || digits[0] < '1' || digits[0] > '5') {
    throw JudgeFormatError("judge score out of range: " + digits);
  }
  return digits[0] - '0';
}

int relevance(const std::string& summary, const GroundTruth& truth, const SliceSpec& spec,
              Backend& judge) {
  auto reply = judge.generate({build_judge_prompt(summary, truth, spec), 16});
  return parse_judge_score(reply.text);
}

}  // namespace tablesum
