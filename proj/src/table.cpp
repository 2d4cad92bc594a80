#include "tablesum/table.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include "tablesum/csv.hpp"
#include "tablesum/errors.hpp"

namespace tablesum {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_decimal(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<double> parse_integer(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return static_cast<double>(value);
}

ColumnKind parse_kind(std::string_view s) {
  if (s == "dimension") return ColumnKind::kDimension;
  if (s == "measure") return ColumnKind::kMeasure;
  if (s == "date") return ColumnKind::kDate;
  throw SchemaError("unknown column kind '" + std::string(s) + "'");
}

ValueType parse_type(std::string_view s) {
  if (s == "text") return ValueType::kText;
  if (s == "decimal") return ValueType::kDecimal;
  if (s == "integer") return ValueType::kInteger;
  if (s == "date") return ValueType::kCalendarDate;
  throw SchemaError("unknown value type '" + std::string(s) + "'");
}

ValueType default_type(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kDimension: return ValueType::kText;
    case ColumnKind::kMeasure: return ValueType::kDecimal;
    case ColumnKind::kDate: return ValueType::kCalendarDate;
  }
  return ValueType::kText;
}

// Maps each schema column to its position in the CSV header.
std::vector<std::size_t> bind_header(const CsvRecord& header, const Schema& schema,
                                     const WarningSink& warn) {
  std::vector<std::size_t> positions(schema.size());
  std::set<std::string> seen;
  for (const auto& name : header.fields) {
    if (!seen.insert(name).second) {
      throw ParseError(header.line, "duplicate header column '" + name + "'");
    }
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    bool found = false;
    for (std::size_t h = 0; h < header.fields.size(); ++h) {
      if (header.fields[h] == schema[c].name) {
        positions[c] = h;
        found = true;
        break;
      }
    }
    if (!found) {
      throw SchemaError("CSV header is missing column '" + schema[c].name + "'");
    }
  }
  for (const auto& name : header.fields) {
    if (!schema.find(name) && warn) {
      warn("ignoring extra CSV column '" + name + "'");
    }
  }
  return positions;
}

template <typename CellFixup>
Table load_impl(std::istream& source, const Schema& schema, const WarningSink& warn,
                CellFixup&& fixup) {
  CsvReader reader(source);
  auto header = reader.next();
  if (!header) throw ParseError(1, "missing header row");
  auto positions = bind_header(*header, schema, warn);

  TableBuilder builder(schema);
  std::vector<std::string_view> cells(schema.size());
  std::vector<std::string> fixed(schema.size());
  while (auto record = reader.next()) {
    if (record->fields.size() != header->fields.size()) {
      throw ParseError(record->line,
                       "expected " + std::to_string(header->fields.size()) +
                           " fields, found " + std::to_string(record->fields.size()));
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string& raw = record->fields[positions[c]];
      if (fixup(c, raw, fixed[c], record->line)) {
        cells[c] = fixed[c];
      } else {
        cells[c] = raw;
      }
    }
    builder.add_row(cells, record->line);
  }
  return std::move(builder).build();
}

}  // namespace

Schema::Schema(std::vector<ColumnSchema> columns) : columns_(std::move(columns)) {
  std::set<std::string> names;
  std::size_t dates = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& col = columns_[i];
    if (col.name.empty()) throw SchemaError("column name must not be empty");
    if (!names.insert(col.name).second) {
      throw SchemaError("duplicate column name '" + col.name + "'");
    }
    switch (col.kind) {
      case ColumnKind::kDate:
        if (col.type != ValueType::kCalendarDate) {
          throw SchemaError("date column '" + col.name + "' must have calendar-date type");
        }
        date_column_ = i;
        ++dates;
        break;
      case ColumnKind::kDimension:
        if (col.type != ValueType::kText) {
          throw SchemaError("dimension column '" + col.name + "' must have text type");
        }
        dimensions_.push_back(i);
        break;
      case ColumnKind::kMeasure:
        if (col.type != ValueType::kDecimal && col.type != ValueType::kInteger) {
          throw SchemaError("measure column '" + col.name + "' must be decimal or integer");
        }
        measures_.push_back(i);
        break;
    }
  }
  if (dates != 1) throw SchemaError("schema needs exactly one date column");
  if (dimensions_.empty()) throw SchemaError("schema needs at least one dimension column");
  if (measures_.empty()) throw SchemaError("schema needs at least one measure column");
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Schema::measure_names() const {
  std::vector<std::string> out;
  for (auto i : measures_) out.push_back(columns_[i].name);
  return out;
}

bool Schema::is_dimension(std::string_view name) const {
  auto idx = find(name);
  return idx && columns_[*idx].kind == ColumnKind::kDimension;
}

Schema reference_schema() {
  return Schema({{"region", ColumnKind::kDimension, ValueType::kText},
                 {"product_category", ColumnKind::kDimension, ValueType::kText},
                 {"date", ColumnKind::kDate, ValueType::kCalendarDate},
                 {"sales_revenue", ColumnKind::kMeasure, ValueType::kDecimal},
                 {"units_sold", ColumnKind::kMeasure, ValueType::kInteger}});
}

Schema extended_reference_schema() {
  auto cols = reference_schema().columns();
  cols.push_back({"discount_percent", ColumnKind::kMeasure, ValueType::kDecimal});
  cols.push_back({"marketing_spend", ColumnKind::kMeasure, ValueType::kDecimal});
  return Schema(std::move(cols));
}

Schema parse_schema(std::istream& in) {
  std::vector<ColumnSchema> cols;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, ',')) parts.emplace_back(trim(part));
    while (!parts.empty() && parts.back().empty()) parts.pop_back();
    if (parts.empty()) continue;
    if (parts.size() < 2 || parts.size() > 3) {
      throw SchemaError("schema line must be 'name,kind[,type]': " + line);
    }
    ColumnSchema col;
    col.name = parts[0];
    col.kind = parse_kind(parts[1]);
    col.type = parts.size() == 3 ? parse_type(parts[2]) : default_type(col.kind);
    cols.push_back(std::move(col));
  }
  return Schema(std::move(cols));
}

const std::vector<std::string>& Table::text_column(std::size_t col) const {
  return std::get<std::vector<std::string>>(data_.at(col));
}

const std::vector<double>& Table::measure_column(std::size_t col) const {
  return std::get<std::vector<double>>(data_.at(col));
}

const std::vector<Date>& Table::dates() const {
  return std::get<std::vector<Date>>(data_.at(schema_.date_column()));
}

TableBuilder::TableBuilder(Schema schema) : schema_(std::move(schema)) {
  for (const auto& col : schema_.columns()) {
    switch (col.kind) {
      case ColumnKind::kDimension: data_.emplace_back(std::vector<std::string>{}); break;
      case ColumnKind::kMeasure: data_.emplace_back(std::vector<double>{}); break;
      case ColumnKind::kDate: data_.emplace_back(std::vector<Date>{}); break;
    }
  }
}

void TableBuilder::add_row(const std::vector<std::string_view>& cells, std::size_t line) {
  if (cells.size() != schema_.size()) {
    throw SchemaError("row has " + std::to_string(cells.size()) + " cells, schema has " +
                      std::to_string(schema_.size()));
  }
  if (line == 0) line = rows_ + 2;  // header is line 1
  // Parse everything first so a bad cell leaves the builder unchanged.
  std::vector<double> numbers(cells.size());
  std::optional<Date> date;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& col = schema_[c];
    switch (col.kind) {
      case ColumnKind::kDimension:
        if (cells[c].empty()) throw TypeError(col.name, line, std::string(cells[c]));
        break;
      case ColumnKind::kMeasure: {
        auto v = col.type == ValueType::kInteger ? parse_integer(cells[c])
                                                 : parse_decimal(cells[c]);
        if (!v) throw TypeError(col.name, line, std::string(cells[c]));
        numbers[c] = *v;
        break;
      }
      case ColumnKind::kDate:
        date = Date::parse(trim(cells[c]));
        if (!date) throw TypeError(col.name, line, std::string(cells[c]));
        break;
    }
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    switch (schema_[c].kind) {
      case ColumnKind::kDimension:
        std::get<std::vector<std::string>>(data_[c]).emplace_back(cells[c]);
        break;
      case ColumnKind::kMeasure:
        std::get<std::vector<double>>(data_[c]).push_back(numbers[c]);
        break;
      case ColumnKind::kDate:
        std::get<std::vector<Date>>(data_[c]).push_back(*date);
        break;
    }
  }
  ++rows_;
}

Table TableBuilder::build() && {
  return Table(std::move(schema_), std::move(data_), rows_);
}

void warn_to_stderr(const std::string& message) {
  std::cerr << "warning: " << message << "\n";
}

Table load_table(std::istream& source, const Schema& schema, const WarningSink& warn) {
  return load_impl(source, schema, warn,
                   [](std::size_t, const std::string&, std::string&, std::size_t) {
                     return false;
                   });
}

Table load_month_name_table(std::istream& source, const Schema& schema, int year,
                            const WarningSink& warn) {
  const std::size_t date_col = schema.date_column();
  const std::string& date_name = schema[date_col].name;
  return load_impl(source, schema, warn,
                   [&](std::size_t c, const std::string& raw, std::string& out,
                       std::size_t line) {
                     if (c != date_col) return false;
                     auto month = parse_month_name(trim(raw));
                     if (!month) throw TypeError(date_name, line, raw);
                     out = Date{year, *month, 1}.to_string();
                     return true;
                   });
}

std::string format_shortest(double value) {
  if (value == 0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  return std::string(buf, ptr);
}

std::string format_decimal(double value, int max_decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", max_decimals, value);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

}  // namespace tablesum
