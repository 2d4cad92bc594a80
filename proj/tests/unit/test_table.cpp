#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "tablesum/csv.hpp"
#include "tablesum/errors.hpp"
#include "tablesum/period.hpp"
#include "tablesum/table.hpp"

namespace tablesum {
namespace {

using test::quiet;

TEST(Period, FormatsAndParses) {
  Period p{2024, 2};
  EXPECT_EQ(p.to_string(), "2024-02");
  EXPECT_EQ(p.to_slash_string(), "02/2024");
  EXPECT_EQ(Period::parse("2024-02"), p);
  EXPECT_FALSE(Period::parse("2024-13"));
  EXPECT_FALSE(Period::parse("2024-2"));
  EXPECT_FALSE(Period::parse("24-02"));
}

TEST(Period, MonthArithmeticWrapsYears) {
  EXPECT_EQ(prev_month({2024, 1}), (Period{2023, 12}));
  EXPECT_EQ(next_month({2023, 12}), (Period{2024, 1}));
  for (long i = 24000; i < 24300; ++i) {
    EXPECT_EQ(Period::from_index(i).index(), i);
    EXPECT_EQ(next_month(prev_month(Period::from_index(i))), Period::from_index(i));
  }
}

TEST(Date, StrictIsoParsing) {
  EXPECT_EQ(Date::parse("2024-02-29"), (Date{2024, 2, 29}));
  EXPECT_FALSE(Date::parse("2023-02-29"));
  EXPECT_FALSE(Date::parse("2024-04-31"));
  EXPECT_FALSE(Date::parse("2024/02/15"));
  EXPECT_FALSE(Date::parse("2024-02-15x"));
  EXPECT_EQ(Date::parse("2024-02-15")->period(), (Period{2024, 2}));
  EXPECT_EQ(days_in_month(1900, 2), 28);
  EXPECT_EQ(days_in_month(2000, 2), 29);
}

TEST(Date, MonthNames) {
  EXPECT_EQ(parse_month_name("January"), 1);
  EXPECT_EQ(parse_month_name("feb"), 2);
  EXPECT_EQ(parse_month_name("DECEMBER"), 12);
  EXPECT_FALSE(parse_month_name("Smarch"));
}

TEST(Csv, QuotedFieldsAndLineNumbers) {
  std::istringstream in("a,b\n\n\"x, y\",\"say \"\"hi\"\"\"\n\"multi\nline\",z\nlast,1\n");
  CsvReader reader(in);
  auto r1 = reader.next();
  ASSERT_TRUE(r1);
  EXPECT_EQ(r1->line, 1u);
  auto r2 = reader.next();
  ASSERT_TRUE(r2);
  EXPECT_EQ(r2->line, 3u);
  EXPECT_EQ(r2->fields, (std::vector<std::string>{"x, y", "say \"hi\""}));
  auto r3 = reader.next();
  ASSERT_TRUE(r3);
  EXPECT_EQ(r3->fields[0], "multi\nline");
  auto r4 = reader.next();
  ASSERT_TRUE(r4);
  EXPECT_EQ(r4->line, 6u);
  EXPECT_FALSE(reader.next());
}

TEST(Csv, RejectsMalformedQuotes) {
  std::istringstream unterminated("a,\"b\n");
  EXPECT_THROW(CsvReader(unterminated).next(), ParseError);
  std::istringstream stray("a,b\"c\n");
  EXPECT_THROW(CsvReader(stray).next(), ParseError);
}

TEST(Csv, EscapeRoundTrips) {
  std::vector<std::string> fields{"plain", "com,ma", "quo\"te", "new\nline", ""};
  std::istringstream in(csv_join(fields) + "\n");
  auto rec = CsvReader(in).next();
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->fields, fields);
}

TEST(Schema, ValidatesRoles) {
  EXPECT_NO_THROW(reference_schema());
  EXPECT_THROW(Schema({{"d", ColumnKind::kDate, ValueType::kCalendarDate},
                       {"m", ColumnKind::kMeasure, ValueType::kDecimal}}),
               SchemaError);
  EXPECT_THROW(Schema({{"r", ColumnKind::kDimension, ValueType::kText},
                       {"m", ColumnKind::kMeasure, ValueType::kDecimal}}),
               SchemaError);
  EXPECT_THROW(Schema({{"r", ColumnKind::kDimension, ValueType::kText},
                       {"r", ColumnKind::kMeasure, ValueType::kDecimal},
                       {"d", ColumnKind::kDate, ValueType::kCalendarDate}}),
               SchemaError);
  EXPECT_THROW(Schema({{"r", ColumnKind::kDimension, ValueType::kText},
                       {"m", ColumnKind::kMeasure, ValueType::kText},
                       {"d", ColumnKind::kDate, ValueType::kCalendarDate}}),
               SchemaError);
}

TEST(Schema, ParsesDeclaration) {
  std::istringstream in("store,dimension\nday,date\nsales,measure,decimal\nqty,measure,integer\n");
  Schema s = parse_schema(in);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(s.measure_names(), (std::vector<std::string>{"sales", "qty"}));
  EXPECT_TRUE(s.is_dimension("store"));
  EXPECT_EQ(s[s.date_column()].name, "day");
  std::istringstream bad("store,dimension\nday,when\n");
  EXPECT_THROW(parse_schema(bad), SchemaError);
}

TEST(LoadTable, Fixture) {
  Table t = test::fixture_table();
  ASSERT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.text_column(0)[1], "North America");
  EXPECT_EQ(t.measure_column(3)[0], 7999.9);
  EXPECT_EQ(t.measure_column(4)[1], 12.0);
  EXPECT_EQ(t.dates()[1], (Date{2024, 2, 15}));
}

TEST(LoadTable, MonthNameFixtureUsesGivenYear) {
  std::ifstream in(test::data_path("fixture_months.csv"));
  Table t = load_month_name_table(in, reference_schema(), 2024, quiet);
  ASSERT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.dates()[0].period(), (Period{2024, 1}));
  EXPECT_EQ(t.dates()[1].period(), (Period{2024, 2}));
}

TEST(LoadTable, HeaderReorderingAndExtraColumns) {
  std::istringstream in(
      "units_sold,note,date,region,product_category,sales_revenue\n"
      "3,hello,2024-03-01,EU,Toys,10.5\n");
  std::vector<std::string> warnings;
  Table t = load_table(in, reference_schema(),
                       [&](const std::string& w) { warnings.push_back(w); });
  EXPECT_EQ(t.rows(), 1u);
  EXPECT_EQ(t.measure_column(3)[0], 10.5);
  EXPECT_EQ(t.measure_column(4)[0], 3.0);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("note"), std::string::npos);
}

TEST(LoadTable, ReportsLineAndColumnOnBadCell) {
  std::istringstream in(
      "region,product_category,date,sales_revenue,units_sold\n"
      "EU,Toys,2024-03-01,10.5,3\n"
      "EU,Toys,2024-03-02,ten,3\n");
  try {
    load_table(in, reference_schema(), quiet);
    FAIL() << "expected TypeError";
  } catch (const TypeError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), "sales_revenue");
    EXPECT_EQ(e.text(), "ten");
  }
}

TEST(LoadTable, RejectsStructuralProblems) {
  std::istringstream missing("region,date,sales_revenue,units_sold\nEU,2024-03-01,1,1\n");
  EXPECT_THROW(load_table(missing, reference_schema(), quiet), SchemaError);
  std::istringstream ragged(
      "region,product_category,date,sales_revenue,units_sold\nEU,Toys,2024-03-01,1\n");
  EXPECT_THROW(load_table(ragged, reference_schema(), quiet), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(load_table(empty, reference_schema(), quiet), ParseError);
  std::istringstream bad_int(
      "region,product_category,date,sales_revenue,units_sold\nEU,Toys,2024-03-01,1,1.5\n");
  EXPECT_THROW(load_table(bad_int, reference_schema(), quiet), TypeError);
  std::istringstream bad_date(
      "region,product_category,date,sales_revenue,units_sold\nEU,Toys,2024-13-01,1,1\n");
  EXPECT_THROW(load_table(bad_date, reference_schema(), quiet), TypeError);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_shortest(2899.9), "2899.9");
  EXPECT_EQ(format_shortest(12.0), "12");
  EXPECT_EQ(format_shortest(1e21).find('e'), std::string::npos);
  EXPECT_EQ(format_decimal(-0.6375, 2), "-0.64");
  EXPECT_EQ(format_decimal(0.2000001, 2), "0.2");
  EXPECT_EQ(format_decimal(5.0, 2), "5");
}

}  // namespace
}  // namespace tablesum
