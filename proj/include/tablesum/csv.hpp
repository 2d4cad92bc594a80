#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tablesum {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

/// Streaming RFC 4180 reader: comma delimiter, double-quote escaping,
/// LF or CRLF line endings, quoted fields may span lines.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Blank lines are skipped.
  /// Throws ParseError on an unterminated quote or stray quote.
  std::optional<CsvRecord> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

/// Quotes a field only when it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

std::string csv_join(const std::vector<std::string>& fields);

}  // namespace tablesum
