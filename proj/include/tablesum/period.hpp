#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace tablesum {

/// A calendar month. Canonical text form is "YYYY-MM".
struct Period {
  int year = 1970;
  int month = 1;

  friend auto operator<=>(const Period&, const Period&) = default;

  std::string to_string() const;
  /// "MM/YYYY", the row label used by the flat baseline prompt.
  std::string to_slash_string() const;

  static std::optional<Period> parse(std::string_view text);
  static Period from_index(long index);
  long index() const { return static_cast<long>(year) * 12 + (month - 1); }
};

Period prev_month(Period period);
Period next_month(Period period);

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend auto operator<=>(const Date&, const Date&) = default;

  Period period() const { return {year, month}; }
  std::string to_string() const;

  /// Strict ISO "YYYY-MM-DD", validated against the month length.
  static std::optional<Date> parse(std::string_view text);
};

int days_in_month(int year, int month);

/// 1..12 for an English month name ("January" or "Jan", any case).
std::optional<int> parse_month_name(std::string_view name);

}  // namespace tablesum
