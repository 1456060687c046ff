// SPDX-License-Identifier: Apache-2.0
//
// Minimal tabular output: fixed column order, CSV with a header row or one
// JSON object per line. Cells are JSON values so numbers stay unquoted.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace h2mux {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string csv_cell(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return csv_escape(v.get<std::string>());
  return v.dump();
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << csv_escape(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << csv_cell(row[i]);
    os << "\n";
  }
}

inline void write_jsonl(std::ostream& os, const Table& t) {
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (size_t i = 0; i < row.size() && i < t.columns.size(); ++i)
      obj[t.columns[i]] = row[i];
    os << obj.dump() << "\n";
  }
}

}  // namespace h2mux
