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

#ifndef PSF__SIGCORE_HPP_
#define PSF__SIGCORE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace psf
{
/// Non-owning view of L samples of a d-dimensional path stored row-major.
struct PathView
{
  std::span<const double> coords;
  std::size_t dim = 0;

  std::size_t length() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return coords.subspan(i * dim, dim); }
  /// Samples first..last inclusive.
  PathView slice(std::size_t first, std::size_t last) const
  {
    return {coords.subspan(first * dim, (last - first + 1) * dim), dim};
  }
};

/// Ordered samples of a piecewise-linear path in R^d.
///
/// Every point has exactly `dim()` coordinates and every coordinate is finite;
/// the constructor throws InputError otherwise.
class DiscretePath
{
public:
  DiscretePath(std::size_t dim, std::vector<double> coords);
  static DiscretePath from_points(const std::vector<std::vector<double>> & points);

  std::size_t dim() const { return dim_; }
  std::size_t length() const { return coords_.size() / dim_; }
  std::span<const double> point(std::size_t i) const
  {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  std::span<const double> coords() const { return coords_; }
  PathView view() const { return {coords_, dim_}; }

  DiscretePath reversed() const;
  DiscretePath translated(std::span<const double> offset) const;

private:
  std::size_t dim_;
  std::vector<double> coords_;
};

/// Signature coefficients of levels 1..n of a d-dimensional path.
///
/// Level k holds d^k values in lexicographic multi-index order; levels are
/// stored back to back in ascending order. The zeroth term is implicitly 1.
class TruncatedSignature
{
public:
  /// The group identity: every stored coefficient is zero.
  TruncatedSignature(std::size_t dim, int level);

  std::size_t dim() const { return dim_; }
  int level() const { return level_; }
  std::size_t size() const { return coeffs_.size(); }

  std::span<const double> coefficients() const { return coeffs_; }
  std::span<double> coefficients() { return coeffs_; }
  std::span<const double> level_block(int k) const;
  std::span<double> level_block(int k);

  /// Coefficient for a 0-based multi-index (i_1, ..., i_k); the empty word gives 1.
  double at(std::span<const std::size_t> word) const;
  double at(std::initializer_list<std::size_t> word) const
  {
    return at(std::span<const std::size_t>(word.begin(), word.size()));
  }

  bool operator==(const TruncatedSignature &) const = default;

private:
  std::size_t dim_;
  int level_;
  std::vector<double> coeffs_;
};

/// Number of signature terms of levels 0..n (or 1..n) for a d-dimensional path.
/// Throws InputError if the count does not fit in 64 bits.
std::uint64_t signature_dimension(std::uint64_t dim, std::uint64_t level, bool include_zeroth);

/// Offset of level k inside the flat coefficient buffer.
std::size_t level_offset(std::size_t dim, int k);

/// Closed-form signature of the straight segment from `start` to `end`.
TruncatedSignature segment_signature(
  std::span<const double> start, std::span<const double> end, int level);

/// Signature of the concatenation of two paths, truncated at their common level.
TruncatedSignature chen_concat(const TruncatedSignature & a, const TruncatedSignature & b);

/// Multiplies `sig` on the right by the signature of a segment with the given
/// increment, in place. Equivalent to chen_concat(sig, segment_signature(...)).
void append_segment(TruncatedSignature & sig, std::span<const double> increment);

TruncatedSignature path_signature(const DiscretePath & path, int level);
TruncatedSignature path_signature(PathView path, int level);

/// Reusable buffers for computing many signatures of the same (dim, level).
class SignatureWorkspace
{
public:
  SignatureWorkspace(std::size_t dim, int level);

  std::size_t dim() const { return dim_; }
  int level() const { return level_; }
  /// Number of coefficients written by compute().
  std::size_t size() const { return size_; }

  void compute(PathView path, std::span<double> out);

private:
  std::size_t dim_;
  int level_;
  std::size_t size_;
  std::vector<double> scratch_;
  std::vector<double> increment_;
};

/// Writes the signature of `path` (levels 1..level) into `out`, which must hold
/// exactly signature_dimension(dim, level, false) values.
void path_signature_into(PathView path, int level, std::span<double> out);

/// S^{12} - S^{21} of a two-dimensional signature.
double levy_area(const TruncatedSignature & sig);
}  // namespace psf

#endif  // PSF__SIGCORE_HPP_
