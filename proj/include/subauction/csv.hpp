#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "subauction/errors.hpp"

namespace subauction {

// Plain-text table with a mandatory header row. Every writer in the project
// goes through format_csv and every consumer through parse_csv, so the pair
// defines the dialect: comma separators, '\n' row ends, RFC-style quoting
// with doubled inner quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const CsvTable& other) const = default;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw InputError("CSV is missing column: " + name);
  }
};

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string format_csv(const CsvTable& table) {
  std::string out;
  auto emit_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_escape(row[i]);
    }
    out += '\n';
  };
  emit_row(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw InputError("CSV row width does not match the header");
    }
    emit_row(row);
  }
  return out;
}

inline CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_begun = false;       // the current field has consumed a character
  bool line_has_content = false;  // distinguishes blank lines from empty fields

  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_begun) {
      in_quotes = true;
      field_begun = true;
      line_has_content = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_begun = false;
      line_has_content = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
      if (line_has_content || !row.empty()) {
        row.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(row));
        row.clear();
      }
      field_begun = false;
      line_has_content = false;
    } else {
      field += c;
      field_begun = true;
      line_has_content = true;
    }
  }
  if (in_quotes) throw InputError("CSV ends inside a quoted field");
  if (line_has_content || !row.empty()) {
    row.push_back(std::move(field));
    records.push_back(std::move(row));
  }
  if (records.empty()) throw InputError("CSV has no header row");

  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw InputError("CSV row " + std::to_string(r) + " has " +
                       std::to_string(records[r].size()) + " fields, expected " +
                       std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

inline void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << format_csv(table);
  if (!out) throw InputError("failed while writing: " + path);
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

// Shortest decimal form that parses back to the same double; "inf"/"-inf"
// and "nan" spellings are accepted by csv_to_double below.
inline std::string csv_from_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline double csv_to_double(const std::string& s) {
  if (s.empty()) throw InputError("empty CSV numeric field");
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw InputError("bad CSV numeric field: " + s);
  return x;
}

}  // namespace subauction
