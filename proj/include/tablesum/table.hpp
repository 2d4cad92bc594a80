#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tablesum/period.hpp"

namespace tablesum {

enum class ColumnKind { kDimension, kMeasure, kDate };
enum class ValueType { kText, kDecimal, kInteger, kCalendarDate };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kDimension;
  ValueType type = ValueType::kText;
};

/// Column roles for a dimensional table. Construction validates: exactly one
/// date column, at least one dimension and one measure, unique names, and
/// kind/type compatibility (dimensions are text, measures numeric).
class Schema {
 public:
  explicit Schema(std::vector<ColumnSchema> columns);

  const std::vector<ColumnSchema>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }
  const ColumnSchema& operator[](std::size_t i) const { return columns_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t date_column() const { return date_column_; }
  const std::vector<std::size_t>& dimension_columns() const { return dimensions_; }
  const std::vector<std::size_t>& measure_columns() const { return measures_; }
  std::vector<std::string> measure_names() const;
  bool is_dimension(std::string_view name) const;

 private:
  std::vector<ColumnSchema> columns_;
  std::size_t date_column_ = 0;
  std::vector<std::size_t> dimensions_;
  std::vector<std::size_t> measures_;
};

/// region, product_category, date, sales_revenue (decimal), units_sold (integer).
Schema reference_schema();

/// Reference schema plus discount_percent and marketing_spend measures.
Schema extended_reference_schema();

/// Parses "name,kind[,type]" lines (kind: dimension|measure|date;
/// type: text|decimal|integer|date). '#' starts a comment.
Schema parse_schema(std::istream& in);

using RowIndex = std::size_t;

/// Immutable columnar table. Dimension cells are text, measure cells are
/// finite doubles (integer measures hold exact integral values), date cells
/// are calendar dates.
class Table {
 public:
  using Column = std::variant<std::vector<std::string>, std::vector<double>,
                              std::vector<Date>>;

  const Schema& schema() const { return schema_; }
  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return schema_.size(); }

  const std::vector<std::string>& text_column(std::size_t col) const;
  const std::vector<double>& measure_column(std::size_t col) const;
  const std::vector<Date>& dates() const;

 private:
  friend class TableBuilder;
  Table(Schema schema, std::vector<Column> data, std::size_t rows)
      : schema_(std::move(schema)), data_(std::move(data)), rows_(rows) {}

  Schema schema_;
  std::vector<Column> data_;
  std::size_t rows_;
};

/// Row-at-a-time construction from text cells, typed per schema.
class TableBuilder {
 public:
  explicit TableBuilder(Schema schema);

  /// Cells are in schema order. Throws TypeError on a bad cell and
  /// SchemaError on a wrong cell count.
  void add_row(const std::vector<std::string_view>& cells, std::size_t line = 0);
  void add_row(std::initializer_list<std::string_view> cells, std::size_t line = 0) {
    add_row(std::vector<std::string_view>(cells), line);
  }

  std::size_t rows() const { return rows_; }
  Table build() &&;

 private:
  Schema schema_;
  std::vector<Table::Column> data_;
  std::size_t rows_ = 0;
};

using WarningSink = std::function<void(const std::string&)>;

/// Writes "warning: <msg>" to stderr.
void warn_to_stderr(const std::string& message);

/// Loads CSV text with a header row. Columns are matched by header name;
/// extra columns are ignored (one warning each); row order is preserved.
Table load_table(std::istream& source, const Schema& schema,
                 const WarningSink& warn = warn_to_stderr);

/// Like load_table, but the date column holds English month names and every
/// row is dated the first of that month in `year`.
Table load_month_name_table(std::istream& source, const Schema& schema, int year,
                            const WarningSink& warn = warn_to_stderr);

/// Shortest decimal text that round-trips the value ("7999.9", "10").
std::string format_shortest(double value);

/// Fixed-point with at most `max_decimals` digits, trailing zeros trimmed.
std::string format_decimal(double value, int max_decimals);

}  // namespace tablesum
