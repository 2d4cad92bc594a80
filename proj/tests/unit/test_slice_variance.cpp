#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "tablesum/errors.hpp"
#include "tablesum/slice.hpp"
#include "tablesum/variance.hpp"

namespace tablesum {
namespace {

SliceSpec random_spec(std::mt19937_64& rng, const GeneratorSettings& g) {
  const auto& region = g.regions[rng() % g.regions.size()];
  const auto& category = g.categories[rng() % g.categories.size()];
  const long first = g.first_month.index();
  const Period cur = Period::from_index(first + 1 + static_cast<long>(rng() % (g.months - 1)));
  return {{{"region", region}, {"product_category", category}}, cur, prev_month(cur)};
}

TEST(Slice, FixtureRows) {
  Table t = test::fixture_table();
  auto pair = slice(t, test::fixture_spec());
  EXPECT_EQ(pair.current, (RowSet{1}));
  EXPECT_EQ(pair.previous, (RowSet{0}));
}

TEST(Slice, MatchesBruteForceAndIsIdempotent) {
  Table t = test::generated_table(3000, 7);
  std::mt19937_64 rng(11);
  GeneratorSettings g;
  for (int i = 0; i < 40; ++i) {
    SliceSpec spec = random_spec(rng, g);
    auto got = slice(t, spec);
    auto want = test::brute_force_slice(t, spec);
    std::sort(got.current.begin(), got.current.end());
    std::sort(got.previous.begin(), got.previous.end());
    EXPECT_EQ(got.current, want.current) << spec.id();
    EXPECT_EQ(got.previous, want.previous) << spec.id();
    auto again = slice(t, spec);
    std::sort(again.current.begin(), again.current.end());
    std::sort(again.previous.begin(), again.previous.end());
    EXPECT_EQ(again.current, got.current);
  }
}

TEST(Slice, RowsAreDisjointAcrossPeriods) {
  Table t = test::generated_table(2000, 3);
  std::mt19937_64 rng(5);
  GeneratorSettings g;
  for (int i = 0; i < 20; ++i) {
    auto pair = slice(t, random_spec(rng, g));
    for (auto r : pair.current) {
      EXPECT_EQ(std::count(pair.previous.begin(), pair.previous.end(), r), 0);
    }
  }
}

TEST(Slice, SpecValidation) {
  const Schema s = reference_schema();
  EXPECT_NO_THROW(validate_spec(test::fixture_spec(), s));
  SliceSpec unknown{{{"store", "x"}}, {2024, 2}, {2024, 1}};
  EXPECT_THROW(validate_spec(unknown, s), SpecError);
  SliceSpec measure{{{"units_sold", "x"}}, {2024, 2}, {2024, 1}};
  EXPECT_THROW(validate_spec(measure, s), SpecError);
  SliceSpec twice{{{"region", "a"}, {"region", "b"}}, {2024, 2}, {2024, 1}};
  EXPECT_THROW(validate_spec(twice, s), SpecError);
  SliceSpec same{{{"region", "a"}}, {2024, 2}, {2024, 2}};
  EXPECT_THROW(validate_spec(same, s), SpecError);
  EXPECT_THROW(slice(test::fixture_table(), same), SpecError);
}

TEST(Slice, SpecId) {
  EXPECT_EQ(test::fixture_spec().id(), "North America|Electronics|2024-02");
  EXPECT_EQ(test::fixture_spec().value_of("region"), "North America");
  EXPECT_FALSE(test::fixture_spec().value_of("store"));
}

TEST(Aggregate, FixtureSums) {
  Table t = test::fixture_table();
  auto pair = slice(t, test::fixture_spec());
  auto cur = aggregate(t, pair.current, {2024, 2});
  EXPECT_EQ(cur.row_count, 1u);
  EXPECT_EQ(cur.value("sales_revenue"), 2899.9);
  EXPECT_EQ(cur.value("units_sold"), 12.0);
  EXPECT_FALSE(cur.value("discount_percent"));
  auto none = aggregate(t, {}, {2024, 3});
  EXPECT_TRUE(none.empty());
  EXPECT_EQ(none.value("sales_revenue"), 0.0);
  EXPECT_THROW(aggregate(t, pair.previous, {2024, 2}), ConsistencyError);
}

TEST(Aggregate, PartitionAdditivity) {
  Table t = test::generated_table(5000, 19);
  std::mt19937_64 rng(23);
  GeneratorSettings g;
  for (int trial = 0; trial < 20; ++trial) {
    SliceSpec spec = random_spec(rng, g);
    auto rows = slice(t, spec).current;
    auto whole = aggregate(t, rows, spec.current);
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t parts = 1 + rng() % 4;
    std::vector<RowSet> split(parts);
    for (std::size_t i = 0; i < rows.size(); ++i) split[rng() % parts].push_back(rows[i]);
    for (const auto& [name, total] : whole.values) {
      long double sum = 0;
      for (const auto& part : split) sum += *aggregate(t, part, spec.current).value(name);
      EXPECT_NEAR(static_cast<double>(sum), total, 1e-9) << name;
    }
  }
}

TEST(Aggregate, CompensatedSum) {
  Schema s({{"r", ColumnKind::kDimension, ValueType::kText},
            {"d", ColumnKind::kDate, ValueType::kCalendarDate},
            {"m", ColumnKind::kMeasure, ValueType::kDecimal}});
  TableBuilder b(s);
  for (const char* v : {"1e16", "1", "-1e16", "1"}) b.add_row({"x", "2024-01-01", v});
  Table t = std::move(b).build();
  auto agg = aggregate(t, {0, 1, 2, 3}, {2024, 1});
  EXPECT_EQ(agg.value("m"), 2.0);
}

// Oracle: the defining ratio evaluated in extended precision.
double oracle_delta(double cur, double prev, double eps) {
  return static_cast<double>((static_cast<long double>(cur) - prev) /
                             (static_cast<long double>(prev) + eps));
}

TEST(Delta, GoldenFixtureValues) {
  auto revenue = compute_delta(2899.9, 7999.9);
  EXPECT_DOUBLE_EQ(revenue.delta, -0.6375079688495309);
  EXPECT_EQ(std::round(revenue.delta * 100) / 100, -0.64);
  auto units = compute_delta(12, 10);
  EXPECT_EQ(std::round(units.delta * 100) / 100, 0.2);
  EXPECT_FALSE(units.baseline_zero);
}

TEST(Delta, MatchesOracle) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> value(0.0, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double c = value(rng), p = value(rng) + 1.0;
    const double got = compute_delta(c, p).delta;
    const double want = oracle_delta(c, p, kDefaultEpsilon);
    EXPECT_LE(std::abs(got - want), 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST(Delta, IdentityIsZero) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> value(0.0, 1e7);
  for (int i = 0; i < 100; ++i) {
    const double x = value(rng);
    EXPECT_EQ(compute_delta(x, x).delta, 0.0);
  }
}

TEST(Delta, SignMatchesDirection) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> value(1.0, 1e5);
  for (int i = 0; i < 500; ++i) {
    const double c = value(rng), p = value(rng);
    const double d = compute_delta(c, p).delta;
    if (c > p) EXPECT_GT(d, 0);
    if (c < p) EXPECT_LT(d, 0);
    EXPECT_GE(d, -1.0);
  }
}

TEST(Delta, ScaleEquivariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> value(1.0, 1e5);
  for (int i = 0; i < 200; ++i) {
    const double c = value(rng), p = value(rng);
    const double base = compute_delta(c, p, 0.0).delta;
    for (double k : {2.0, 0.5, 1024.0, -4.0}) {
      EXPECT_EQ(compute_delta(k * c, k * p, 0.0).delta, base);
    }
    for (double k : {3.0, 0.1, 7.5}) {
      EXPECT_NEAR(compute_delta(k * c, k * p, 0.0).delta, base, 1e-12 * std::max(1.0, std::abs(base)));
    }
  }
}

TEST(Delta, ZeroBaseline) {
  auto d = compute_delta(5, 0);
  EXPECT_TRUE(d.baseline_zero);
  EXPECT_DOUBLE_EQ(d.delta, 5e9);
  EXPECT_EQ(compute_delta(0, 0).delta, 0.0);
  EXPECT_THROW(compute_delta(5, 0, 0.0), NumericDomainError);
}

TEST(Delta, DomainErrors) {
  EXPECT_THROW(compute_delta(NAN, 1), NumericDomainError);
  EXPECT_THROW(compute_delta(1, INFINITY), NumericDomainError);
  EXPECT_THROW(compute_delta(1, 1, -1e-9), NumericDomainError);
  EXPECT_THROW(compute_delta(1, -1e-9), NumericDomainError);
  EXPECT_THROW(compute_delta(1e308, 1e-300, 0.0), NumericDomainError);
}

TEST(Delta, AllMeasuresInSchemaOrder) {
  Table t = test::fixture_table();
  auto pair = slice(t, test::fixture_spec());
  auto deltas = compute_all_deltas(aggregate(t, pair.current, {2024, 2}),
                                   aggregate(t, pair.previous, {2024, 1}));
  ASSERT_EQ(deltas.size(), 2u);
  EXPECT_EQ(deltas[0].measure, "sales_revenue");
  EXPECT_EQ(deltas[0].current, 2899.9);
  EXPECT_EQ(deltas[0].previous, 7999.9);
  EXPECT_EQ(deltas[1].measure, "units_sold");

  AggregatedMetrics a{{2024, 2}, {{"x", 1.0}}, 1};
  AggregatedMetrics b{{2024, 1}, {{"y", 1.0}}, 1};
  EXPECT_THROW(compute_all_deltas(a, b), ConsistencyError);
}

}  // namespace
}  // namespace tablesum
