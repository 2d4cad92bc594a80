#include "tablesum/context_store.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "tablesum/csv.hpp"
#include "tablesum/errors.hpp"

namespace tablesum {
namespace {

constexpr const char* kColumns[] = {"period", "region", "product_category", "kind",
                                    "payload"};

std::optional<std::string> spec_category(const SliceSpec& spec) {
  if (auto v = spec.value_of("product_category")) return v;
  return spec.value_of("category");
}

}  // namespace

std::string to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::kSeasonality: return "seasonality";
    case SignalKind::kPromotion: return "promotion";
    case SignalKind::kMarketingSpend: return "marketing-spend";
    case SignalKind::kAnomaly: return "anomaly";
    case SignalKind::kFreeText: return "free-text";
  }
  return "free-text";
}

std::optional<SignalKind> parse_signal_kind(std::string_view text) {
  for (auto k : {SignalKind::kSeasonality, SignalKind::kPromotion,
                 SignalKind::kMarketingSpend, SignalKind::kAnomaly, SignalKind::kFreeText}) {
    if (to_string(k) == text) return k;
  }
  if (text == "marketing_spend") return SignalKind::kMarketingSpend;
  if (text == "free_text") return SignalKind::kFreeText;
  return std::nullopt;
}

std::string ContextSignal::describe() const {
  return to_string(kind) + ": " + payload + " (" + period.to_string() + ")";
}

std::optional<std::string> category_dimension(const Schema& schema) {
  if (schema.is_dimension("product_category")) return "product_category";
  if (schema.is_dimension("category")) return "category";
  return std::nullopt;
}

ContextStore ContextStore::load(std::istream& in) {
  CsvReader reader(in);
  auto header = reader.next();
  if (!header) return {};
  std::vector<std::size_t> pos;
  for (const char* name : kColumns) {
    auto it = std::find(header->fields.begin(), header->fields.end(), name);
    if (it == header->fields.end()) {
      throw SchemaError(std::string("context store is missing column '") + name + "'");
    }
    pos.push_back(static_cast<std::size_t>(it - header->fields.begin()));
  }

  std::vector<ContextSignal> signals;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != header->fields.size()) {
      throw ParseError(rec->line, "context row has wrong field count");
    }
    auto period = Period::parse(rec->fields[pos[0]]);
    if (!period) throw TypeError("period", rec->line, rec->fields[pos[0]]);
    auto kind = parse_signal_kind(rec->fields[pos[3]]);
    if (!kind) throw TypeError("kind", rec->line, rec->fields[pos[3]]);
    if (rec->fields[pos[1]].empty()) throw TypeError("region", rec->line, "");
    if (rec->fields[pos[2]].empty()) throw TypeError("product_category", rec->line, "");
    signals.push_back({*period, rec->fields[pos[1]], rec->fields[pos[2]], *kind,
                       rec->fields[pos[4]]});
  }
  return ContextStore(std::move(signals));
}

void ContextStore::validate_against(const Table& table) const {
  const auto& schema = table.schema();
  auto check = [&](std::optional<std::string> dim, auto member, const char* label) {
    if (!dim) return;
    const auto& column = table.text_column(*schema.find(*dim));
    std::set<std::string_view> values(column.begin(), column.end());
    for (const auto& s : signals_) {
      if (!values.contains(s.*member)) {
        throw ConsistencyError(std::string("context signal ") + label + " '" + s.*member +
                               "' does not occur in the table");
      }
    }
  };
  check(schema.is_dimension("region") ? std::optional<std::string>("region") : std::nullopt,
        &ContextSignal::region, "region");
  check(category_dimension(schema), &ContextSignal::product_category, "category");
}

std::vector<ContextSignal> ContextStore::lookup(const SliceSpec& spec) const {
  std::vector<ContextSignal> out;
  auto region = spec.value_of("region");
  auto category = spec_category(spec);
  if (!region || !category) return out;
  for (Period p : {spec.current, spec.previous}) {
    for (const auto& s : signals_) {
      if (s.period == p && s.region == *region && s.product_category == *category) {
        out.push_back(s);
      }
    }
  }
  return out;
}

void ContextStore::write(std::ostream& out) const {
  out << "period,region,product_category,kind,payload\n";
  for (const auto& s : signals_) {
    out << csv_join({s.period.to_string(), s.region, s.product_category, to_string(s.kind),
                     s.payload})
        << "\n";
  }
}

}  // namespace tablesum
