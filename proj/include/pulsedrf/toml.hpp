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

// A strict subset of TOML: [section] headers, key = value lines, comments.
// Values are numbers, double-quoted strings, booleans and single-line arrays
// of those. Every problem is collected with its line number before failing.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pulsedrf/error.hpp"
#include "pulsedrf/io.hpp"

namespace pulsedrf::toml {

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<double, std::string, bool, Array> data;
  int line = 0;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }
};

// Section name ("" for the root) -> key -> value.
using Document = std::map<std::string, std::map<std::string, Value>>;

class ParseError : public FormatError {
 public:
  explicit ParseError(std::vector<std::string> messages)
      : FormatError(join(messages)), messages_(std::move(messages)) {}
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& m) {
    std::string s;
    for (const auto& x : m) s += (s.empty() ? "" : "\n") + x;
    return s;
  }
  std::vector<std::string> messages_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool bare_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

class ValueParser {
 public:
  explicit ValueParser(std::string_view s) : s_(s) {}

  Value parse_all() {
    Value v = parse();
    skip_ws();
    if (i_ != s_.size()) fail("trailing characters after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& m) const { throw FormatError(m); }

  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }

  Value parse() {
    skip_ws();
    if (i_ >= s_.size()) fail("missing value");
    const char c = s_[i_];
    if (c == '"') return {parse_string()};
    if (c == '[') return {parse_array()};
    if (s_.substr(i_, 4) == "true") {
      i_ += 4;
      return {true};
    }
    if (s_.substr(i_, 5) == "false") {
      i_ += 5;
      return {false};
    }
    return {parse_number()};
  }

  std::string parse_string() {
    ++i_;
    std::string out;
    while (i_ < s_.size() && s_[i_] != '"') {
      char c = s_[i_++];
      if (c == '\\') {
        if (i_ >= s_.size()) fail("unterminated escape");
        const char e = s_[i_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out += c;
    }
    if (i_ >= s_.size()) fail("unterminated string");
    ++i_;
    return out;
  }

  Array parse_array() {
    ++i_;
    Array out;
    skip_ws();
    if (i_ < s_.size() && s_[i_] == ']') {
      ++i_;
      return out;
    }
    for (;;) {
      out.push_back(parse());
      skip_ws();
      if (i_ >= s_.size()) fail("unterminated array");
      if (s_[i_] == ',') {
        ++i_;
        skip_ws();
        if (i_ < s_.size() && s_[i_] == ']') {
          ++i_;
          break;
        }
        continue;
      }
      if (s_[i_] == ']') {
        ++i_;
        break;
      }
      fail("expected ',' or ']' in array");
    }
    return out;
  }

  double parse_number() {
    std::size_t j = i_;
    while (j < s_.size() && s_[j] != ',' && s_[j] != ']' && s_[j] != ' ' && s_[j] != '\t') ++j;
    std::string tok;
    for (char c : s_.substr(i_, j - i_))
      if (c != '_') tok += c;
    i_ = j;
    if (tok.empty()) fail("missing value");
    if (tok.front() == '+') tok.erase(0, 1);
    try {
      return io::parse_double(tok);
    } catch (const FormatError&) {
      fail("invalid value '" + tok + "'");
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

// Cuts a trailing comment outside string literals.
inline std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

// Unclosed '[' count outside strings.
inline int open_brackets(std::string_view s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (in_string) continue;
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
  }
  return depth;
}

}  // namespace detail

inline Value parse_value(std::string_view text) { return detail::ValueParser(text).parse_all(); }

inline Document parse(const std::string& text) {
  Document doc;
  doc[""];
  std::vector<std::string> errors;
  std::string section;
  std::vector<std::string> seen;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view raw(text.data() + pos, end - pos);
    pos = end + 1;
    ++lineno;
    const auto line = detail::trim(detail::strip_comment(raw));
    auto error = [&](const std::string& m) { errors.push_back("line " + std::to_string(lineno) + ": " + m); };
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        error("malformed section header");
        continue;
      }
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::bare_key(name)) {
        error("invalid section name '" + std::string(name) + "'");
        continue;
      }
      section = std::string(name);
      if (std::find(seen.begin(), seen.end(), section) != seen.end())
        error("section [" + section + "] defined twice");
      seen.push_back(section);
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      error("expected 'key = value'");
      continue;
    }
    const auto key = std::string(detail::trim(line.substr(0, eq)));
    if (!detail::bare_key(key)) {
      error("invalid key '" + key + "'");
      continue;
    }
    auto& table = doc[section];
    if (table.count(key)) {
      error("duplicate key '" + key + "'");
      continue;
    }
    // Arrays may continue over following lines until the brackets balance.
    std::string value(line.substr(eq + 1));
    const int first_line = lineno;
    while (detail::open_brackets(value) > 0 && pos <= text.size()) {
      const std::size_t next = std::min(text.find('\n', pos), text.size());
      value += ' ';
      value += detail::strip_comment(std::string_view(text.data() + pos, next - pos));
      pos = next + 1;
      ++lineno;
    }
    try {
      Value v = parse_value(value);
      v.line = first_line;
      table.emplace(key, std::move(v));
    } catch (const FormatError& e) {
      errors.push_back("line " + std::to_string(first_line) + ": " + e.what() + " for key '" + key + "'");
    }
  }
  if (!errors.empty()) throw ParseError(std::move(errors));
  return doc;
}

}  // namespace pulsedrf::toml
