// Copyright 2026 The psf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSF__KEYVALUE_HPP_
#define PSF__KEYVALUE_HPP_

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "psf/error.hpp"

namespace psf::kv
{
struct Entry
{
  std::string key;
  std::string value;
  std::size_t line = 0;
};

inline std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// "key = value" lines; blank lines and lines starting with '#' are skipped.
inline std::vector<Entry> parse(const std::string & text, const std::string & source)
{
  std::vector<Entry> out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw FormatError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    out.push_back({trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno});
  }
  return out;
}

[[noreturn]] inline void bad_value(const Entry & e, const std::string & source, const char * expected)
{
  throw FormatError(
    source + ":" + std::to_string(e.line) + ": value '" + e.value + "' for '" + e.key +
    "' is not " + expected);
}

inline std::uint64_t to_u64(const Entry & e, const std::string & source)
{
  std::uint64_t v = 0;
  const auto * end = e.value.data() + e.value.size();
  auto [p, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || p != end) {
    bad_value(e, source, "a non-negative integer");
  }
  return v;
}

inline double to_double(const Entry & e, const std::string & source)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used != e.value.size()) {
      bad_value(e, source, "a number");
    }
    return v;
  } catch (const std::logic_error &) {
    bad_value(e, source, "a number");
  }
}

inline bool to_bool(const Entry & e, const std::string & source)
{
  if (e.value == "true" || e.value == "1" || e.value == "yes" || e.value == "on") {
    return true;
  }
  if (e.value == "false" || e.value == "0" || e.value == "no" || e.value == "off") {
    return false;
  }
  bad_value(e, source, "a boolean");
}

/// Splits on commas and/or whitespace.
inline std::vector<std::string> split_list(const std::string & value)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) {
        out.push_back(cur);
      }
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) {
    out.push_back(cur);
  }
  return out;
}
}  // namespace psf::kv

#endif  // PSF__KEYVALUE_HPP_
