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

#ifndef PSF__BINARY_HPP_
#define PSF__BINARY_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "psf/error.hpp"

namespace psf::binary
{
inline void put_u64(std::string & out, std::uint64_t v)
{
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

inline void put_f64(std::string & out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_f64s(std::string & out, std::span<const double> values)
{
  out.reserve(out.size() + values.size() * 8);
  for (double v : values) {
    put_f64(out, v);
  }
}

/// Little-endian cursor over an in-memory file; errors name the byte offset.
class Reader
{
public:
  Reader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::string_view bytes(std::size_t n, const char * field)
  {
    need(n, field);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint8_t u8(const char * field) { return static_cast<std::uint8_t>(bytes(1, field)[0]); }

  std::uint64_t u64(const char * field)
  {
    auto s = bytes(8, field);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    }
    return v;
  }

  double f64(const char * field) { return std::bit_cast<double>(u64(field)); }

  void f64s(std::span<double> out, const char * field)
  {
    need(out.size() * 8, field);
    for (auto & v : out) {
      v = f64(field);
    }
  }

  [[noreturn]] void fail(const std::string & message) const
  {
    throw FormatError(source_ + ": " + message + " at byte " + std::to_string(pos_));
  }

private:
  void need(std::size_t n, const char * field) const
  {
    if (n > remaining()) {
      fail(
        std::string("truncated while reading ") + field + " (needed " + std::to_string(n) +
        " bytes, " + std::to_string(remaining()) + " left)");
    }
  }

  std::string_view data_;
  std::string source_;
  std::size_t pos_ = 0;
};
}  // namespace psf::binary

#endif  // PSF__BINARY_HPP_
