#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "tablesum/datagen.hpp"
#include "tablesum/slice.hpp"
#include "tablesum/table.hpp"

namespace tablesum::test {

inline std::string data_path(const std::string& name) {
  return std::string(TABLESUM_TEST_DATA) + "/" + name;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void quiet(const std::string&) {}

inline Table fixture_table() {
  std::ifstream in(data_path("fixture.csv"));
  return load_table(in, reference_schema(), quiet);
}

inline SliceSpec fixture_spec() {
  return SliceSpec{{{"region", "North America"}, {"product_category", "Electronics"}},
                   {2024, 2},
                   {2024, 1}};
}

inline Table generated_table(std::size_t rows, std::uint64_t seed,
                             ContextStore* store_out = nullptr) {
  GeneratorSettings settings;
  settings.rows = rows;
  settings.seed = seed;
  std::stringstream csv;
  auto store = generate_dataset(settings, csv);
  if (store_out) *store_out = std::move(store);
  return load_table(csv, extended_reference_schema(), quiet);
}

// Reference slice: a plain scan with no shared code beyond column access.
inline SlicePair brute_force_slice(const Table& table, const SliceSpec& spec) {
  SlicePair out;
  const auto& schema = table.schema();
  for (RowIndex r = 0; r < table.rows(); ++r) {
    bool match = true;
    for (const auto& a : spec.assignments) {
      const auto col = *schema.find(a.dimension);
      if (table.text_column(col)[r] != a.value) match = false;
    }
    if (!match) continue;
    const Date d = table.dates()[r];
    if (d.year == spec.current.year && d.month == spec.current.month) out.current.push_back(r);
    if (d.year == spec.previous.year && d.month == spec.previous.month) out.previous.push_back(r);
  }
  return out;
}

}  // namespace tablesum::test
