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

#ifndef PSF__TRANSFORMS_HPP_
#define PSF__TRANSFORMS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "psf/sigcore.hpp"

namespace psf
{
/// Sample range [start, end] (inclusive) at dyadic depth `level`.
struct IndexWindow
{
  std::size_t start = 0;
  std::size_t end = 0;
  int level = 0;

  bool operator==(const IndexWindow &) const = default;
};

/// Appends a time coordinate i/(L-1) (0 for a single sample).
DiscretePath add_time(const DiscretePath & path);
void add_time_into(PathView path, std::vector<double> & out);

/// Lifts a scalar series to a d_llt-dimensional path whose coordinate j is the
/// series delayed by j steps, zero-padded at the front.
DiscretePath lead_lag(std::span<const double> series, int d_llt);
void lead_lag_into(std::span<const double> series, int d_llt, std::vector<double> & out);

/// Dyadic hierarchy of windows for depths 0..depth-1, coarse to fine.
/// Split points at depth j are round-half-up(m (L-1) / 2^j); adjacent windows
/// share their boundary sample.
std::vector<IndexWindow> dyadic_windows(std::size_t length, int depth);

/// M frame indices round-half-up(i (F-1) / (M-1)).
std::vector<std::size_t> uniform_sample(std::size_t frame_count, std::size_t samples);

/// Natural cubic spline through (knots, values) evaluated at `queries`.
/// Knots must be strictly increasing; one knot gives a constant.
std::vector<double> natural_cubic_spline(
  std::span<const double> knots, std::span<const double> values, std::span<const double> queries);

/// Completes a per-frame scalar series. Interior gaps are filled by a natural
/// cubic spline through the valid frames, leading/trailing gaps hold the
/// nearest valid value, and a series with no valid frame becomes all zeros.
std::vector<double> fill_missing(std::span<const double> series, std::span<const std::uint8_t> valid);

/// Same as above for `channels` interleaved coordinates per frame.
std::vector<double> fill_missing(
  std::span<const double> values, std::size_t channels, std::span<const std::uint8_t> valid);
}  // namespace psf

#endif  // PSF__TRANSFORMS_HPP_
