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

#ifndef PSF__DROPCONNECT_HPP_
#define PSF__DROPCONNECT_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace psf
{
/// Gaps between kept weights when every weight is dropped independently with
/// probability p, so that P(gap >= k) = p^k. Draws invert the CDF through a
/// table of powers of p indexed by the leading bits of the uniform variate.
class GapSampler
{
public:
  explicit GapSampler(double drop);

  /// Largest k with u <= p^k, for u in (0, 1].
  std::uint64_t gap(double u) const;

  std::uint64_t operator()(std::mt19937_64 & rng) const { return gap(unit(rng)); }

  /// Uniform on (0, 1] with 53 random bits.
  static double unit(std::mt19937_64 & rng)
  {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
  }

private:
  double drop_;
  bool table_ = false;
  std::vector<double> powers_;  // p^k down to the first power below 2^-53
  std::vector<std::uint32_t> first_;  // per bucket, the gap at its largest u
};
}  // namespace psf

#endif  // PSF__DROPCONNECT_HPP_
