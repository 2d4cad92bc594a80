#include "tablesum/datagen.hpp"

#include <cmath>
#include <random>
#include <set>

#include "tablesum/csv.hpp"
#include "tablesum/errors.hpp"
#include "tablesum/table.hpp"

namespace tablesum {
namespace {

// Uniform double in [lo, hi) from raw engine output, independent of the
// standard library's distribution implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return rng() % n; }

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

double seasonal_multiplier(int month) {
  switch (month) {
    case 1: return 0.8;
    case 2: return 0.85;
    case 7: return 1.1;
    case 11: return 1.4;
    case 12: return 1.8;
    default: return 1.0;
  }
}

ContextStore generate_dataset(const GeneratorSettings& settings, std::ostream& csv_out) {
  if (settings.rows == 0) throw ConfigError("row count must be positive");
  if (settings.months <= 0) throw ConfigError("month span must be positive");
  if (settings.regions.empty() || settings.categories.empty()) {
    throw ConfigError("generator needs at least one region and one category");
  }

  std::mt19937_64 rng(settings.seed);
  const std::size_t n_regions = settings.regions.size();
  const std::size_t n_categories = settings.categories.size();
  const std::size_t cells = n_regions * n_categories;

  std::vector<double> base_price(cells);
  std::vector<double> base_units(cells);
  std::vector<std::set<int>> promo_months(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    base_price[c] = round2(uniform(rng, 20.0, 800.0));
    base_units[c] = uniform(rng, 2.0, 12.0);
    const int wanted = std::min(settings.promotions_per_cell, settings.months);
    while (static_cast<int>(promo_months[c].size()) < wanted) {
      promo_months[c].insert(static_cast<int>(pick(rng, static_cast<std::size_t>(settings.months))));
    }
  }

  std::vector<ContextSignal> signals;
  for (std::size_t r = 0; r < n_regions; ++r) {
    for (std::size_t k = 0; k < n_categories; ++k) {
      const std::size_t c = r * n_categories + k;
      for (int m = 0; m < settings.months; ++m) {
        const Period p = Period::from_index(settings.first_month.index() + m);
        if (p.month == 11) {
          signals.push_back({p, settings.regions[r], settings.categories[k],
                             SignalKind::kSeasonality, "holiday season demand begins"});
        } else if (p.month == 12) {
          signals.push_back({p, settings.regions[r], settings.categories[k],
                             SignalKind::kSeasonality, "peak holiday season"});
        } else if (p.month == 1) {
          signals.push_back({p, settings.regions[r], settings.categories[k],
                             SignalKind::kSeasonality, "post-holiday slowdown"});
        }
        if (promo_months[c].contains(m)) {
          signals.push_back({p, settings.regions[r], settings.categories[k],
                             SignalKind::kPromotion, "discount promotion with boosted marketing"});
        }
      }
    }
  }

  csv_out << "region,product_category,date,sales_revenue,units_sold,discount_percent,"
             "marketing_spend\n";
  for (std::size_t i = 0; i < settings.rows; ++i) {
    const std::size_t r = pick(rng, n_regions);
    const std::size_t k = pick(rng, n_categories);
    const std::size_t c = r * n_categories + k;
    const int m = static_cast<int>(pick(rng, static_cast<std::size_t>(settings.months)));
    const Period p = Period::from_index(settings.first_month.index() + m);
    const int day = 1 + static_cast<int>(pick(rng, static_cast<std::size_t>(days_in_month(p.year, p.month))));
    const bool promo = promo_months[c].contains(m);

    const double discount = round2(promo ? uniform(rng, 15.0, 35.0) : uniform(rng, 0.0, 10.0));
    const double demand = base_units[c] * seasonal_multiplier(p.month) * (promo ? 1.5 : 1.0);
    const long units = std::max(1L, std::lround(demand * uniform(rng, 0.5, 1.5)));
    const double unit_price = base_price[c] * (1.0 - discount / 100.0) * uniform(rng, 0.9, 1.1);
    const double revenue = round2(unit_price * static_cast<double>(units));
    const double marketing = round2(uniform(rng, 50.0, 500.0) * (promo ? 2.5 : 1.0));

    csv_out << csv_join({settings.regions[r], settings.categories[k],
                         Date{p.year, p.month, day}.to_string(), format_decimal(revenue, 2),
                         std::to_string(units), format_decimal(discount, 2),
                         format_decimal(marketing, 2)})
            << "\n";
  }
  return ContextStore(std::move(signals));
}

}  // namespace tablesum
