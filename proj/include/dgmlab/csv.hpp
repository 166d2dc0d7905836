#pragma once

// Comma-separated tables with a header row and 17 significant digits.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dgmlab/error.hpp"

namespace dgmlab {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void add(std::vector<std::string> row) {
    require(row.size() == header_.size(), "CsvTable: row width does not match the header");
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::ostringstream out;
    write_row(out, header_);
    for (const auto& r : rows_) write_row(out, r);
    return out.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeFailure("cannot write " + path);
    f << str();
    if (!f) throw RuntimeFailure("write failed for " + path);
  }

  // Reads a table written by save(); fields hold no commas or quotes.
  static CsvTable load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw ValidationError(path + ": empty table");
    CsvTable t(split(line));
    while (std::getline(f, line))
      if (!line.empty()) t.add(split(line));
    return t;
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
      if (header_[i] == name) return i;
    throw ValidationError("no column '" + name + "'");
  }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  }

  static void write_row(std::ostream& out, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace dgmlab
