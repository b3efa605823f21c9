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

#include "psf/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "psf/error.hpp"
#include "psf/transforms.hpp"

namespace psf
{
SkeletonClip SkeletonClip::zeros(
  std::size_t frames, std::size_t actors, std::size_t joints, std::size_t dims)
{
  SkeletonClip clip;
  clip.frames = frames;
  clip.actors = actors;
  clip.joints = joints;
  clip.dims = dims;
  clip.coords.assign(frames * actors * joints * dims, 0.0);
  clip.valid.assign(frames * actors * joints, 1);
  return clip;
}

std::size_t SkeletonClip::detected_actors() const
{
  std::size_t count = 0;
  for (std::size_t a = 0; a < actors; ++a) {
    bool seen = false;
    for (std::size_t f = 0; f < frames && !seen; ++f) {
      for (std::size_t j = 0; j < joints && !seen; ++j) {
        seen = is_valid(f, a, j);
      }
    }
    count += seen ? 1 : 0;
  }
  return count;
}

void SkeletonClip::validate() const
{
  if (frames < 1 || actors < 1 || joints < 2 || (dims != 2 && dims != 3)) {
    throw InputError(
      "clip '" + id + "' needs F >= 1, A >= 1, N >= 2 and d in {2, 3}; got F=" +
      std::to_string(frames) + " A=" + std::to_string(actors) + " N=" + std::to_string(joints) +
      " d=" + std::to_string(dims));
  }
  if (coords.size() != frames * actors * joints * dims || valid.size() != frames * actors * joints) {
    throw InputError("clip '" + id + "' buffers do not match its shape");
  }
  for (std::size_t s = 0; s < valid.size(); ++s) {
    if (!valid[s]) {
      continue;
    }
    for (std::size_t c = 0; c < dims; ++c) {
      if (!std::isfinite(coords[s * dims + c])) {
        throw InputError("clip '" + id + "' has a non-finite coordinate");
      }
    }
  }
}

DatasetDescriptor DatasetDescriptor::simple(std::size_t joints, std::size_t dims, std::size_t classes)
{
  DatasetDescriptor desc;
  desc.joints = joints;
  desc.dims = dims;
  for (std::size_t j = 0; j < joints; ++j) {
    desc.priority.push_back(j);
    desc.mirror.push_back(j);
  }
  for (std::size_t c = 0; c < classes; ++c) {
    desc.classes.push_back("class" + std::to_string(c));
  }
  return desc;
}

void DatasetDescriptor::validate() const
{
  if (joints < 2 || (dims != 2 && dims != 3)) {
    throw InputError("descriptor needs joints >= 2 and dims in {2, 3}");
  }
  auto is_permutation = [&](const std::vector<std::size_t> & p) {
    if (p.size() != joints) {
      return false;
    }
    std::vector<std::uint8_t> seen(joints, 0);
    for (std::size_t v : p) {
      if (v >= joints || seen[v]) {
        return false;
      }
      seen[v] = 1;
    }
    return true;
  };
  if (!is_permutation(priority)) {
    throw InputError("priority order is not a permutation of 0.." + std::to_string(joints - 1));
  }
  if (!is_permutation(mirror)) {
    throw InputError("mirror map is not a permutation of 0.." + std::to_string(joints - 1));
  }
  for (std::size_t j = 0; j < joints; ++j) {
    if (mirror[mirror[j]] != j) {
      throw InputError("mirror map is not an involution at joint " + std::to_string(j));
    }
  }
  if (horizontal_axis >= dims) {
    throw InputError("horizontal axis out of range");
  }
}

DatasetDescriptor DatasetDescriptor::merged(std::size_t copies) const
{
  DatasetDescriptor out;
  out.joints = joints * copies;
  out.dims = dims;
  out.horizontal_axis = horizontal_axis;
  out.classes = classes;
  for (std::size_t c = 0; c < copies; ++c) {
    for (std::size_t j : priority) {
      out.priority.push_back(c * joints + j);
    }
    for (std::size_t j : mirror) {
      out.mirror.push_back(c * joints + j);
    }
  }
  return out;
}

SkeletonClip normalize_clip(const SkeletonClip & clip, Centering centering)
{
  SkeletonClip out = clip;
  const std::size_t d = clip.dims;
  std::vector<double> mean(d);

  auto center = [&](std::size_t f_begin, std::size_t f_end, std::size_t a) {
    std::fill(mean.begin(), mean.end(), 0.0);
    std::size_t count = 0;
    for (std::size_t f = f_begin; f < f_end; ++f) {
      for (std::size_t j = 0; j < clip.joints; ++j) {
        if (clip.is_valid(f, a, j)) {
          auto p = clip.joint(f, a, j);
          for (std::size_t c = 0; c < d; ++c) mean[c] += p[c];
          ++count;
        }
      }
    }
    if (count == 0) {
      return;
    }
    for (auto & m : mean) m /= static_cast<double>(count);
    for (std::size_t f = f_begin; f < f_end; ++f) {
      for (std::size_t j = 0; j < clip.joints; ++j) {
        if (clip.is_valid(f, a, j)) {
          auto p = out.joint(f, a, j);
          for (std::size_t c = 0; c < d; ++c) p[c] -= mean[c];
        }
      }
    }
  };

  for (std::size_t a = 0; a < clip.actors; ++a) {
    if (centering == Centering::clip) {
      center(0, clip.frames, a);
    } else {
      for (std::size_t f = 0; f < clip.frames; ++f) center(f, f + 1, a);
    }
  }

  double peak = 0.0;
  for (std::size_t s = 0; s < out.valid.size(); ++s) {
    if (out.valid[s]) {
      for (std::size_t c = 0; c < d; ++c) peak = std::max(peak, std::abs(out.coords[s * d + c]));
    }
  }
  if (peak > 0.0) {
    for (std::size_t s = 0; s < out.valid.size(); ++s) {
      if (out.valid[s]) {
        for (std::size_t c = 0; c < d; ++c) out.coords[s * d + c] /= peak;
      }
    }
  }
  return out;
}

SkeletonClip horizontal_flip(const SkeletonClip & clip, const DatasetDescriptor & descriptor)
{
  if (descriptor.joints != clip.joints || descriptor.mirror.size() != clip.joints) {
    throw InputError("descriptor joint count does not match the clip");
  }
  if (descriptor.horizontal_axis >= clip.dims) {
    throw InputError("horizontal axis out of range for the clip");
  }
  SkeletonClip out = clip;
  for (std::size_t f = 0; f < clip.frames; ++f) {
    for (std::size_t a = 0; a < clip.actors; ++a) {
      for (std::size_t j = 0; j < clip.joints; ++j) {
        const std::size_t src = descriptor.mirror[j];
        auto from = clip.joint(f, a, src);
        auto to = out.joint(f, a, j);
        std::copy(from.begin(), from.end(), to.begin());
        to[descriptor.horizontal_axis] = -to[descriptor.horizontal_axis];
        out.valid[out.slot(f, a, j)] = clip.valid[clip.slot(f, a, src)];
      }
    }
  }
  return out;
}

SkeletonClip add_gaussian_noise(const SkeletonClip & clip, double sigma, std::uint64_t seed)
{
  if (!(sigma >= 0.0)) {
    throw InputError("noise sigma must be >= 0");
  }
  SkeletonClip out = clip;
  if (sigma == 0.0) {
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t s = 0; s < out.valid.size(); ++s) {
    if (out.valid[s]) {
      for (std::size_t c = 0; c < out.dims; ++c) out.coords[s * out.dims + c] += noise(rng);
    }
  }
  return out;
}

SkeletonClip fill_clip(const SkeletonClip & clip)
{
  SkeletonClip out = clip;
  const std::size_t d = clip.dims;
  std::vector<double> series(clip.frames * d);
  std::vector<std::uint8_t> mask(clip.frames);
  for (std::size_t a = 0; a < clip.actors; ++a) {
    for (std::size_t j = 0; j < clip.joints; ++j) {
      bool any = false;
      bool gaps = false;
      for (std::size_t f = 0; f < clip.frames; ++f) {
        mask[f] = clip.valid[clip.slot(f, a, j)];
        any = any || mask[f];
        gaps = gaps || !mask[f];
        auto p = clip.joint(f, a, j);
        std::copy(p.begin(), p.end(), series.begin() + static_cast<std::ptrdiff_t>(f * d));
      }
      if (!gaps) {
        continue;
      }
      auto filled = fill_missing(series, d, mask);
      for (std::size_t f = 0; f < clip.frames; ++f) {
        auto p = out.joint(f, a, j);
        std::copy_n(filled.begin() + static_cast<std::ptrdiff_t>(f * d), d, p.begin());
        out.valid[out.slot(f, a, j)] = any ? 1 : 0;
      }
    }
  }
  return out;
}

SkeletonClip prepare_clip(const SkeletonClip & clip, Centering centering)
{
  return fill_clip(normalize_clip(clip, centering));
}

std::vector<SkeletonClip> augment_clip(
  const SkeletonClip & clip, const DatasetDescriptor & descriptor, const AugmentConfig & config,
  std::uint64_t seed)
{
  std::vector<SkeletonClip> out{clip};
  if (config.flip) {
    out.push_back(horizontal_flip(clip, descriptor));
  }
  // Distinct, seed-derived streams per copy.
  std::seed_seq seq{seed, std::uint64_t{0x5eed}};
  std::vector<std::uint32_t> seeds(static_cast<std::size_t>(std::max(config.noise_copies, 0)) * 2);
  seq.generate(seeds.begin(), seeds.end());
  for (int k = 0; k < config.noise_copies; ++k) {
    const std::uint64_t s = (std::uint64_t{seeds[2 * k]} << 32) | seeds[2 * k + 1];
    out.push_back(add_gaussian_noise(clip, config.noise_sigma, s));
  }
  return out;
}

SkeletonClip merge_actors(const SkeletonClip & clip, std::span<const std::size_t> actors)
{
  if (actors.empty()) {
    throw InputError("merge_actors needs at least one actor");
  }
  SkeletonClip out = SkeletonClip::zeros(clip.frames, 1, clip.joints * actors.size(), clip.dims);
  out.label = clip.label;
  out.id = clip.id;
  for (std::size_t f = 0; f < clip.frames; ++f) {
    for (std::size_t k = 0; k < actors.size(); ++k) {
      for (std::size_t j = 0; j < clip.joints; ++j) {
        const std::size_t dst = k * clip.joints + j;
        if (actors[k] >= clip.actors) {
          out.valid[out.slot(f, 0, dst)] = 0;
          continue;
        }
        auto from = clip.joint(f, actors[k], j);
        std::copy(from.begin(), from.end(), out.joint(f, 0, dst).begin());
        out.valid[out.slot(f, 0, dst)] = clip.valid[clip.slot(f, actors[k], j)];
      }
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> enumerate_pathlets(
  std::size_t joints, std::size_t size, std::span<const std::size_t> priority)
{
  if (size != 2 && size != 3) {
    throw InputError("pathlets have 2 or 3 joints");
  }
  if (priority.size() != joints) {
    throw InputError("priority order must list every joint");
  }
  std::vector<std::vector<std::size_t>> out;
  if (size == 2) {
    for (std::size_t a = 0; a < joints; ++a) {
      for (std::size_t b = a + 1; b < joints; ++b) {
        out.push_back({priority[a], priority[b]});
      }
    }
  } else {
    for (std::size_t a = 0; a < joints; ++a) {
      for (std::size_t b = a + 1; b < joints; ++b) {
        for (std::size_t c = b + 1; c < joints; ++c) {
          out.push_back({priority[a], priority[b], priority[c]});
        }
      }
    }
  }
  return out;
}
}  // namespace psf
