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

#include "psf/transforms.hpp"

#include <algorithm>
#include <string>

#include "psf/error.hpp"

namespace psf
{
void add_time_into(PathView path, std::vector<double> & out)
{
  const std::size_t L = path.length();
  const std::size_t d = path.dim;
  out.resize(L * (d + 1));
  for (std::size_t i = 0; i < L; ++i) {
    auto p = path.point(i);
    std::copy(p.begin(), p.end(), out.begin() + static_cast<std::ptrdiff_t>(i * (d + 1)));
    out[i * (d + 1) + d] = L > 1 ? static_cast<double>(i) / static_cast<double>(L - 1) : 0.0;
  }
}

DiscretePath add_time(const DiscretePath & path)
{
  std::vector<double> out;
  add_time_into(path.view(), out);
  return DiscretePath(path.dim() + 1, std::move(out));
}

void lead_lag_into(std::span<const double> series, int d_llt, std::vector<double> & out)
{
  if (d_llt < 1) {
    throw InputError("lead-lag dimension must be >= 1, got " + std::to_string(d_llt));
  }
  if (series.empty()) {
    throw InputError("lead-lag needs a non-empty series");
  }
  const std::size_t L = series.size();
  const std::size_t k = static_cast<std::size_t>(d_llt);
  out.assign(L * k, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t j = 0; j < k && j <= t; ++j) {
      out[t * k + j] = series[t - j];
    }
  }
}

DiscretePath lead_lag(std::span<const double> series, int d_llt)
{
  std::vector<double> out;
  lead_lag_into(series, d_llt, out);
  return DiscretePath(static_cast<std::size_t>(d_llt), std::move(out));
}

std::vector<IndexWindow> dyadic_windows(std::size_t length, int depth)
{
  if (length < 2) {
    throw InputError("dyadic windows need a path of at least 2 samples");
  }
  if (depth < 1 || depth > 30) {
    throw InputError("dyadic depth must be in [1, 30], got " + std::to_string(depth));
  }
  const std::size_t span = length - 1;
  const std::size_t finest = std::size_t{1} << (depth - 1);
  if (span < finest) {
    throw InputError(
      "path of " + std::to_string(length) + " samples is too short for dyadic depth " +
      std::to_string(depth));
  }
  std::vector<IndexWindow> out;
  out.reserve(2 * finest - 1);
  for (int j = 0; j < depth; ++j) {
    const std::size_t parts = std::size_t{1} << j;
    auto split = [&](std::size_t m) { return (2 * m * span + parts) / (2 * parts); };
    for (std::size_t m = 0; m < parts; ++m) {
      out.push_back({split(m), split(m + 1), j});
    }
  }
  return out;
}

std::vector<std::size_t> uniform_sample(std::size_t frame_count, std::size_t samples)
{
  if (frame_count < 1 || samples < 1) {
    throw InputError("uniform_sample needs at least one frame and one sample");
  }
  std::vector<std::size_t> out(samples, 0);
  if (samples == 1 || frame_count == 1) {
    return out;
  }
  const std::size_t num = frame_count - 1;
  const std::size_t den = samples - 1;
  for (std::size_t i = 0; i < samples; ++i) {
    out[i] = (2 * i * num + den) / (2 * den);
  }
  return out;
}

std::vector<double> natural_cubic_spline(
  std::span<const double> knots, std::span<const double> values, std::span<const double> queries)
{
  const std::size_t n = knots.size();
  if (n == 0 || values.size() != n) {
    throw InputError("spline needs matching non-empty knots and values");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(knots[i] > knots[i - 1])) {
      throw InputError("spline knots must be strictly increasing");
    }
  }
  std::vector<double> out(queries.size());
  if (n == 1) {
    std::fill(out.begin(), out.end(), values[0]);
    return out;
  }

  // Second derivatives m[i] with m[0] = m[n-1] = 0, tridiagonal solve.
  std::vector<double> h(n - 1), m(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = knots[i + 1] - knots[i];
  }
  if (n > 2) {
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t i = r + 1;
      diag[r] = 2.0 * (h[i - 1] + h[i]);
      upper[r] = h[i];
      rhs[r] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
    }
    for (std::size_t r = 1; r < k; ++r) {
      const double lower = h[r];
      const double w = lower / diag[r - 1];
      diag[r] -= w * upper[r - 1];
      rhs[r] -= w * rhs[r - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t r = k - 1; r-- > 0;) {
      m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
    }
  }

  std::size_t seg = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const double x = queries[q];
    if (x <= knots[0]) {
      seg = 0;
    } else if (x >= knots[n - 1]) {
      seg = n - 2;
    } else {
      seg = static_cast<std::size_t>(
              std::upper_bound(knots.begin(), knots.end(), x) - knots.begin()) - 1;
    }
    const double a = knots[seg + 1] - x;
    const double b = x - knots[seg];
    const double hi = h[seg];
    out[q] = (m[seg] * a * a * a + m[seg + 1] * b * b * b) / (6.0 * hi) +
             (values[seg] / hi - m[seg] * hi / 6.0) * a +
             (values[seg + 1] / hi - m[seg + 1] * hi / 6.0) * b;
  }
  return out;
}

std::vector<double> fill_missing(
  std::span<const double> values, std::size_t channels, std::span<const std::uint8_t> valid)
{
  if (channels == 0 || values.size() != valid.size() * channels) {
    throw InputError("fill_missing: values and mask sizes disagree");
  }
  const std::size_t F = valid.size();
  std::vector<double> out(values.begin(), values.end());
  std::vector<double> knots;
  std::vector<double> gaps;
  for (std::size_t f = 0; f < F; ++f) {
    if (valid[f]) {
      knots.push_back(static_cast<double>(f));
    }
  }
  if (knots.empty()) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  if (knots.size() == F) {
    return out;
  }
  const auto first = static_cast<std::size_t>(knots.front());
  const auto last = static_cast<std::size_t>(knots.back());
  for (std::size_t f = first; f <= last; ++f) {
    if (!valid[f]) {
      gaps.push_back(static_cast<double>(f));
    }
  }

  std::vector<double> ys(knots.size());
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < knots.size(); ++i) {
      ys[i] = values[static_cast<std::size_t>(knots[i]) * channels + c];
    }
    auto filled = natural_cubic_spline(knots, ys, gaps);
    for (std::size_t g = 0; g < gaps.size(); ++g) {
      out[static_cast<std::size_t>(gaps[g]) * channels + c] = filled[g];
    }
    for (std::size_t f = 0; f < first; ++f) {
      out[f * channels + c] = values[first * channels + c];
    }
    for (std::size_t f = last + 1; f < F; ++f) {
      out[f * channels + c] = values[last * channels + c];
    }
  }
  return out;
}

std::vector<double> fill_missing(std::span<const double> series, std::span<const std::uint8_t> valid)
{
  return fill_missing(series, 1, valid);
}
}  // namespace psf
