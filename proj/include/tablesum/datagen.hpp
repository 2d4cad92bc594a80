#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tablesum/context_store.hpp"
#include "tablesum/period.hpp"

namespace tablesum {

struct GeneratorSettings {
  std::size_t rows = 1000;
  std::uint64_t seed = 42;
  Period first_month{2023, 1};
  int months = 24;
  std::vector<std::string> regions = {"North America", "Europe", "Asia Pacific",
                                      "Latin America"};
  std::vector<std::string> categories = {"Electronics", "Clothing", "Home & Garden", "Sports",
                                         "Toys"};
  int promotions_per_cell = 3;  // promotion months per (region, category)
};

/// Synthetic retail sales in the extended reference schema: region,
/// product_category, date, sales_revenue, units_sold, discount_percent,
/// marketing_spend. Demand follows a holiday-season multiplier and each
/// (region, category) gets a few promotion months with deeper discounts and
/// higher marketing spend. Output is a pure function of the settings.
///
/// The returned store names every seasonal and promotion month so the
/// context agent has something to find.
ContextStore generate_dataset(const GeneratorSettings& settings, std::ostream& csv_out);

/// Seasonal demand multiplier for a calendar month (1..12).
double seasonal_multiplier(int month);

}  // namespace tablesum
