#include "tablesum/csv.hpp"

#include "tablesum/errors.hpp"

namespace tablesum {

std::optional<CsvRecord> CsvReader::next() {
  std::string raw;
  while (true) {
    if (!std::getline(in_, raw)) return std::nullopt;
    ++line_;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (!raw.empty()) break;
  }

  CsvRecord record;
  record.line = line_;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  std::size_t i = 0;

  while (true) {
    if (i == raw.size()) {
      if (!in_quotes) break;
      // Quoted field continues on the next physical line.
      if (!std::getline(in_, raw)) {
        throw ParseError(record.line, "unterminated quoted field");
      }
      ++line_;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      field.push_back('\n');
      i = 0;
      continue;
    }
    char c = raw[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < raw.size() && raw[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == ',') {
      record.fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '"') {
      if (!field.empty() || was_quoted) {
        throw ParseError(line_, "unexpected quote inside unquoted field");
      }
      in_quotes = true;
      was_quoted = true;
    } else {
      if (was_quoted) {
        throw ParseError(line_, "characters after closing quote");
      }
      field.push_back(c);
    }
    ++i;
  }
  record.fields.push_back(std::move(field));
  return record;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  return out;
}

}  // namespace tablesum
