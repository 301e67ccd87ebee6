// Copyright 2026 The pulsedrf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Result files: CSV tables with a header row, JSON documents, atomic writes.

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pulsedrf/error.hpp"

namespace pulsedrf::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, r.ptr};
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw FormatError("not a number: '" + std::string(s) + "'");
  return x;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row) {
    detail::require(row.size() == columns.size(), "row width does not match the header");
    rows.push_back(std::move(row));
  }

  std::vector<double> column(std::string_view name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] != name) continue;
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& r : rows) out.push_back(r[c]);
      return out;
    }
    throw InvalidArgument("no column '" + std::string(name) + "'");
  }

  bool operator==(const Table&) const = default;
};

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += ',';
      out += format_double(r[c]);
    }
    out += '\n';
  }
  return out;
}

inline Table parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Table t;
  auto split = [](const std::string& l) {
    std::vector<std::string> f;
    std::string cur;
    for (char ch : l) {
      if (ch == ',') {
        f.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    f.push_back(cur);
    return f;
  };
  if (!std::getline(in, line)) throw FormatError("CSV has no header row");
  t.columns = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != t.columns.size())
      throw FormatError("CSV line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
    std::vector<double> row;
    for (const auto& s : f) row.push_back(parse_double(s));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes through a temporary file in the same directory and renames it
// into place.
inline void write_atomic(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace pulsedrf::io
