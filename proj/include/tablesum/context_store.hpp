#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "tablesum/period.hpp"
#include "tablesum/slice.hpp"

namespace tablesum {

enum class SignalKind { kSeasonality, kPromotion, kMarketingSpend, kAnomaly, kFreeText };

std::string to_string(SignalKind kind);
std::optional<SignalKind> parse_signal_kind(std::string_view text);

/// External metadata attached to one (period, region, category) cell.
struct ContextSignal {
  Period period;
  std::string region;
  std::string product_category;
  SignalKind kind = SignalKind::kFreeText;
  std::string payload;

  friend bool operator==(const ContextSignal&, const ContextSignal&) = default;

  /// "<kind>: <payload> (<YYYY-MM>)"
  std::string describe() const;
};

/// Name of the category dimension in `schema`: "product_category" if
/// present, else "category".
std::optional<std::string> category_dimension(const Schema& schema);

class ContextStore {
 public:
  ContextStore() = default;
  explicit ContextStore(std::vector<ContextSignal> signals) : signals_(std::move(signals)) {}

  /// CSV with header period,region,product_category,kind,payload.
  /// Throws ParseError/TypeError on malformed rows.
  static ContextStore load(std::istream& in);

  /// Throws ConsistencyError if a signal names a region or category value
  /// that never appears in `table`.
  void validate_against(const Table& table) const;

  const std::vector<ContextSignal>& signals() const { return signals_; }
  bool empty() const { return signals_.empty(); }

  /// Signals for the spec's region/category in its current period, followed
  /// by those in its previous period, each group in store order.
  std::vector<ContextSignal> lookup(const SliceSpec& spec) const;

  void write(std::ostream& out) const;

 private:
  std::vector<ContextSignal> signals_;
};

}  // namespace tablesum
