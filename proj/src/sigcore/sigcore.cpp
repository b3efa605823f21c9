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

#include "psf/sigcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psf/error.hpp"

namespace psf
{
namespace
{
std::size_t ipow(std::size_t base, int exp)
{
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
  }
  return r;
}

void check_level(int level)
{
  if (level < 1) {
    throw InputError("signature level must be >= 1, got " + std::to_string(level));
  }
}

// Right-multiplies the truncated signature held in `sig` (levels 1..n) by the
// signature of a straight segment with increment `inc`. Level k is rebuilt
// with the Horner form
//   R_0 = 1,  R_i = R_{i-1} (x) inc / (k - i + 1) + S_i,  S_k <- R_k,
// from the highest level down so lower levels are still the old values.
// `scratch` holds at least d^(n-1) doubles.
void append_increment(
  double * sig, std::size_t d, int n, const double * inc, std::vector<double> & scratch)
{
  for (int k = n; k >= 2; --k) {
    double * r = scratch.data();
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t b = 0; b < d; ++b) {
      r[b] = inc[b] * inv_k + sig[b];
    }
    std::size_t len = d;
    for (int i = 2; i < k; ++i) {
      const double scale = 1.0 / static_cast<double>(k - i + 1);
      const double * si = sig + level_offset(d, i);
      // Expanding in place: entry a is read before indices a*d.. are written.
      for (std::size_t a = len; a-- > 0;) {
        const double ra = r[a] * scale;
        double * dst = r + a * d;
        const double * src = si + a * d;
        for (std::size_t b = 0; b < d; ++b) {
          dst[b] = ra * inc[b] + src[b];
        }
      }
      len *= d;
    }
    double * sk = sig + level_offset(d, k);
    for (std::size_t a = 0; a < len; ++a) {
      const double ra = r[a];
      double * dst = sk + a * d;
      for (std::size_t b = 0; b < d; ++b) {
        dst[b] += ra * inc[b];
      }
    }
  }
  for (std::size_t b = 0; b < d; ++b) {
    sig[b] += inc[b];
  }
}
}  // namespace

DiscretePath::DiscretePath(std::size_t dim, std::vector<double> coords)
: dim_(dim), coords_(std::move(coords))
{
  if (dim_ == 0) {
    throw InputError("path dimension must be >= 1");
  }
  if (coords_.empty() || coords_.size() % dim_ != 0) {
    throw InputError(
      "path needs a positive multiple of " + std::to_string(dim_) + " coordinates, got " +
      std::to_string(coords_.size()));
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i])) {
      throw InputError(
        "non-finite coordinate at sample " + std::to_string(i / dim_) + ", axis " +
        std::to_string(i % dim_));
    }
  }
}

DiscretePath DiscretePath::from_points(const std::vector<std::vector<double>> & points)
{
  if (points.empty()) {
    throw InputError("path needs at least one point");
  }
  const std::size_t d = points.front().size();
  std::vector<double> coords;
  coords.reserve(points.size() * d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw InputError(
        "point " + std::to_string(i) + " has " + std::to_string(points[i].size()) +
        " coordinates, expected " + std::to_string(d));
    }
    coords.insert(coords.end(), points[i].begin(), points[i].end());
  }
  return DiscretePath(d, std::move(coords));
}

DiscretePath DiscretePath::reversed() const
{
  std::vector<double> out;
  out.reserve(coords_.size());
  for (std::size_t i = length(); i-- > 0;) {
    auto p = point(i);
    out.insert(out.end(), p.begin(), p.end());
  }
  return DiscretePath(dim_, std::move(out));
}

DiscretePath DiscretePath::translated(std::span<const double> offset) const
{
  if (offset.size() != dim_) {
    throw InputError("translation offset has wrong dimension");
  }
  std::vector<double> out = coords_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += offset[i % dim_];
  }
  return DiscretePath(dim_, std::move(out));
}

TruncatedSignature::TruncatedSignature(std::size_t dim, int level) : dim_(dim), level_(level)
{
  if (dim == 0) {
    throw InputError("signature dimension must be >= 1");
  }
  check_level(level);
  coeffs_.assign(static_cast<std::size_t>(signature_dimension(dim, level, false)), 0.0);
}

std::span<const double> TruncatedSignature::level_block(int k) const
{
  if (k < 1 || k > level_) {
    throw InputError("level " + std::to_string(k) + " out of range");
  }
  return std::span<const double>(coeffs_).subspan(level_offset(dim_, k), ipow(dim_, k));
}

std::span<double> TruncatedSignature::level_block(int k)
{
  if (k < 1 || k > level_) {
    throw InputError("level " + std::to_string(k) + " out of range");
  }
  return std::span<double>(coeffs_).subspan(level_offset(dim_, k), ipow(dim_, k));
}

double TruncatedSignature::at(std::span<const std::size_t> word) const
{
  if (word.empty()) {
    return 1.0;
  }
  const int k = static_cast<int>(word.size());
  if (k > level_) {
    throw InputError("multi-index longer than truncation level");
  }
  std::size_t idx = 0;
  for (std::size_t letter : word) {
    if (letter >= dim_) {
      throw InputError("multi-index letter out of range");
    }
    idx = idx * dim_ + letter;
  }
  return coeffs_[level_offset(dim_, k) + idx];
}

std::uint64_t signature_dimension(std::uint64_t dim, std::uint64_t level, bool include_zeroth)
{
  if (dim == 0) {
    throw InputError("signature dimension needs d >= 1");
  }
  std::uint64_t total = include_zeroth ? 1 : 0;
  std::uint64_t term = 1;
  for (std::uint64_t k = 1; k <= level; ++k) {
    if (__builtin_mul_overflow(term, dim, &term) || __builtin_add_overflow(total, term, &total)) {
      throw InputError("signature dimension overflows 64 bits");
    }
  }
  return total;
}

std::size_t level_offset(std::size_t dim, int k)
{
  // Sum of d^j for j = 1..k-1.
  std::size_t off = 0;
  std::size_t term = 1;
  for (int j = 1; j < k; ++j) {
    term *= dim;
    off += term;
  }
  return off;
}

TruncatedSignature segment_signature(
  std::span<const double> start, std::span<const double> end, int level)
{
  if (start.size() != end.size()) {
    throw InputError(
      "segment endpoints differ in dimension: " + std::to_string(start.size()) + " vs " +
      std::to_string(end.size()));
  }
  check_level(level);
  const std::size_t d = start.size();
  TruncatedSignature sig(d, level);
  std::vector<double> inc(d);
  for (std::size_t i = 0; i < d; ++i) {
    inc[i] = end[i] - start[i];
  }
  // Level k is the k-fold outer product of the increment divided by k!.
  auto prev = sig.level_block(1);
  std::copy(inc.begin(), inc.end(), prev.begin());
  for (int k = 2; k <= level; ++k) {
    auto cur = sig.level_block(k);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t a = 0; a < prev.size(); ++a) {
      const double pa = prev[a] * inv_k;
      for (std::size_t b = 0; b < d; ++b) {
        cur[a * d + b] = pa * inc[b];
      }
    }
    prev = cur;
  }
  return sig;
}

TruncatedSignature chen_concat(const TruncatedSignature & a, const TruncatedSignature & b)
{
  if (a.dim() != b.dim()) {
    throw InputError(
      "chen_concat dimension mismatch: " + std::to_string(a.dim()) + " vs " +
      std::to_string(b.dim()));
  }
  if (a.level() != b.level()) {
    throw InputError(
      "chen_concat level mismatch: " + std::to_string(a.level()) + " vs " +
      std::to_string(b.level()));
  }
  const int n = a.level();
  TruncatedSignature out(a.dim(), n);
  for (int k = 1; k <= n; ++k) {
    auto dst = out.level_block(k);
    auto ak = a.level_block(k);
    auto bk = b.level_block(k);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = ak[i] + bk[i];
    }
    for (int m = 1; m < k; ++m) {
      auto left = a.level_block(m);
      auto right = b.level_block(k - m);
      const std::size_t stride = right.size();
      for (std::size_t u = 0; u < left.size(); ++u) {
        const double lu = left[u];
        double * row = dst.data() + u * stride;
        for (std::size_t v = 0; v < stride; ++v) {
          row[v] += lu * right[v];
        }
      }
    }
  }
  return out;
}

void append_segment(TruncatedSignature & sig, std::span<const double> increment)
{
  if (increment.size() != sig.dim()) {
    throw InputError("increment dimension does not match signature");
  }
  const std::size_t d = sig.dim();
  std::vector<double> scratch(sig.level() > 1 ? ipow(d, sig.level() - 1) : 1);
  append_increment(sig.coefficients().data(), d, sig.level(), increment.data(), scratch);
}

SignatureWorkspace::SignatureWorkspace(std::size_t dim, int level)
: dim_(dim),
  level_(level),
  size_(static_cast<std::size_t>(signature_dimension(dim, static_cast<std::uint64_t>(std::max(level, 0)), false))),
  scratch_(level > 1 ? ipow(dim, level - 1) : 1),
  increment_(dim)
{
  check_level(level);
}

void SignatureWorkspace::compute(PathView path, std::span<double> out)
{
  if (path.dim != dim_ || path.length() == 0) {
    throw InputError(
      "workspace for dimension " + std::to_string(dim_) + " got a path of dimension " +
      std::to_string(path.dim) + " and length " + std::to_string(path.length()));
  }
  if (out.size() != size_) {
    throw InputError("output buffer has the wrong size for this signature");
  }
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t d = dim_;
  double * inc = increment_.data();
  const std::size_t L = path.length();
  for (std::size_t t = 0; t + 1 < L; ++t) {
    const double * p0 = path.coords.data() + t * d;
    const double * p1 = p0 + d;
    for (std::size_t i = 0; i < d; ++i) {
      inc[i] = p1[i] - p0[i];
    }
    append_increment(out.data(), d, level_, inc, scratch_);
  }
}

void path_signature_into(PathView path, int level, std::span<double> out)
{
  check_level(level);
  if (path.dim == 0) {
    throw InputError("path dimension must be >= 1");
  }
  SignatureWorkspace(path.dim, level).compute(path, out);
}

TruncatedSignature path_signature(PathView path, int level)
{
  check_level(level);
  if (path.dim == 0) {
    throw InputError("path dimension must be >= 1");
  }
  TruncatedSignature sig(path.dim, level);
  path_signature_into(path, level, sig.coefficients());
  return sig;
}

TruncatedSignature path_signature(const DiscretePath & path, int level)
{
  return path_signature(path.view(), level);
}

double levy_area(const TruncatedSignature & sig)
{
  if (sig.dim() != 2 || sig.level() < 2) {
    throw InputError("levy_area needs a two-dimensional signature of level >= 2");
  }
  auto l2 = sig.level_block(2);
  return l2[1] - l2[2];
}
}  // namespace psf
