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

#include "psf/dropconnect.hpp"

#include <bit>
#include <cmath>

#include "psf/error.hpp"

namespace psf
{
namespace
{
constexpr int kBucketShift = 44;  // keep the exponent and 8 mantissa bits
constexpr double kSmallest = 0x1.0p-53;
constexpr std::size_t kMaxPowers = std::size_t{1} << 20;

std::uint64_t bucket_of(double u) { return std::bit_cast<std::uint64_t>(u) >> kBucketShift; }
}  // namespace

GapSampler::GapSampler(double drop) : drop_(drop)
{
  if (!(drop >= 0.0 && drop < 1.0)) {
    throw InputError("dropconnect probability must be in [0, 1)");
  }
  // Beyond this the table would be huge; fall back to the logarithm.
  if (drop > 0.0 && std::log(kSmallest) / std::log(drop) > static_cast<double>(kMaxPowers)) {
    return;
  }
  table_ = true;
  powers_.push_back(1.0);
  while (powers_.back() >= kSmallest) {
    powers_.push_back(powers_.back() * drop);
  }
  const std::uint64_t lo = bucket_of(kSmallest), hi = bucket_of(1.0);
  first_.resize(hi - lo + 1);
  std::uint32_t k = static_cast<std::uint32_t>(powers_.size() - 1);
  for (std::uint64_t b = lo; b <= hi; ++b) {
    const double top =
      b == hi ? 1.0 : std::bit_cast<double>(((b + 1) << kBucketShift) - 1);
    while (k > 0 && top > powers_[k]) --k;
    first_[b - lo] = k;
  }
}

std::uint64_t GapSampler::gap(double u) const
{
  if (!table_) {
    return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(drop_)));
  }
  std::uint64_t k = first_[bucket_of(u) - bucket_of(kSmallest)];
  // powers_.back() < 2^-53 <= u stops the walk.
  while (u <= powers_[k + 1]) ++k;
  return k;
}
}  // namespace psf
