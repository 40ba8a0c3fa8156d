#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "membrane/errors.hpp"

namespace membrane {

/// %.12g rendering: 12 significant digits, no locale surprises.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

using CsvCell = std::variant<std::string, double, std::int64_t>;

/// RFC-4180 writer: header row first, fixed column order, CRLF-free output,
/// quotes only where required.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header)
      : out_(path), columns_(header.size()) {
    if (!out_) throw invalid_argument("CsvWriter: cannot open " + path);
    write_row_raw(header);
  }

  void row(const std::vector<CsvCell>& cells) {
    require(cells.size() == columns_, "CsvWriter: column count mismatch");
    std::vector<std::string> rendered;
    rendered.reserve(cells.size());
    for (const auto& c : cells) {
      if (std::holds_alternative<double>(c))
        rendered.push_back(format_number(std::get<double>(c)));
      else if (std::holds_alternative<std::int64_t>(c))
        rendered.push_back(std::to_string(std::get<std::int64_t>(c)));
      else
        rendered.push_back(std::get<std::string>(c));
    }
    write_row_raw(rendered);
  }

 private:
  static bool needs_quotes(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
  }
  static std::string quote(const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    q += '"';
    return q;
  }
  void write_row_raw(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << (needs_quotes(cells[i]) ? quote(cells[i]) : cells[i]);
    }
    out_ << '\n';
  }

  std::ofstream out_;
  std::size_t columns_;
};

/// FNV-1a, for config provenance stamping.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Companion provenance file <name>.meta.csv: key,value rows so the data CSV
/// schema stays stable.
inline void write_meta(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& items) {
  CsvWriter meta(path, {"key", "value"});
  for (const auto& [k, v] : items) meta.row({k, v});
}

}  // namespace membrane
