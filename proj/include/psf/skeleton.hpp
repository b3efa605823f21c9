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

#ifndef PSF__SKELETON_HPP_
#define PSF__SKELETON_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace psf
{
/// Joint coordinates of a clip, indexed (frame, actor, joint, axis), with a
/// validity flag per (frame, actor, joint).
struct SkeletonClip
{
  std::size_t frames = 0;
  std::size_t actors = 0;
  std::size_t joints = 0;
  std::size_t dims = 0;
  std::vector<double> coords;
  std::vector<std::uint8_t> valid;
  std::optional<int> label;
  std::string id;

  /// All-zero clip with every entry marked valid.
  static SkeletonClip zeros(std::size_t frames, std::size_t actors, std::size_t joints, std::size_t dims);

  std::size_t slot(std::size_t f, std::size_t a, std::size_t j) const
  {
    return (f * actors + a) * joints + j;
  }
  std::span<double> joint(std::size_t f, std::size_t a, std::size_t j)
  {
    return std::span<double>(coords).subspan(slot(f, a, j) * dims, dims);
  }
  std::span<const double> joint(std::size_t f, std::size_t a, std::size_t j) const
  {
    return std::span<const double>(coords).subspan(slot(f, a, j) * dims, dims);
  }
  /// N x d coordinates of one actor in one frame.
  std::span<const double> pose(std::size_t f, std::size_t a) const
  {
    return std::span<const double>(coords).subspan(slot(f, a, 0) * dims, joints * dims);
  }
  bool is_valid(std::size_t f, std::size_t a, std::size_t j) const { return valid[slot(f, a, j)] != 0; }

  /// Actors with at least one valid joint in at least one frame.
  std::size_t detected_actors() const;

  /// Throws InputError when shapes or values break the clip invariants.
  void validate() const;

  bool operator==(const SkeletonClip &) const = default;
};

/// Skeleton topology shared by every clip of a dataset.
struct DatasetDescriptor
{
  std::size_t joints = 0;
  std::size_t dims = 0;
  /// Joint indices from highest to lowest priority; fixes pathlet orientation.
  std::vector<std::size_t> priority;
  /// Joint that takes the place of joint j after a horizontal flip.
  std::vector<std::size_t> mirror;
  std::size_t horizontal_axis = 0;
  std::vector<std::string> classes;

  /// Identity priority and mirror maps.
  static DatasetDescriptor simple(std::size_t joints, std::size_t dims, std::size_t classes = 0);

  void validate() const;

  /// Descriptor for `copies` skeletons treated as one body of copies*N joints.
  DatasetDescriptor merged(std::size_t copies) const;
};

enum class Centering
{
  clip,
  frame,
};

/// Per-actor centering on the mean valid joint position (over the whole clip,
/// or per frame), then a single clip-wide scale so coordinates lie in [-1, 1].
SkeletonClip normalize_clip(const SkeletonClip & clip, Centering centering = Centering::clip);

/// Negates the horizontal axis and permutes joints through the mirror map.
SkeletonClip horizontal_flip(const SkeletonClip & clip, const DatasetDescriptor & descriptor);

/// Adds N(0, sigma^2) noise to every valid coordinate; deterministic in `seed`.
SkeletonClip add_gaussian_noise(const SkeletonClip & clip, double sigma, std::uint64_t seed);

/// Fills invalid entries per (actor, joint) along time: cubic spline inside,
/// hold at the ends. A joint never seen in the clip becomes zeros and stays
/// marked invalid.
SkeletonClip fill_clip(const SkeletonClip & clip);

/// normalize_clip followed by fill_clip.
SkeletonClip prepare_clip(const SkeletonClip & clip, Centering centering = Centering::clip);

struct AugmentConfig
{
  bool flip = true;
  int noise_copies = 2;
  double noise_sigma = 0.01;
};

/// The clean clip followed by its augmented copies.
std::vector<SkeletonClip> augment_clip(
  const SkeletonClip & clip, const DatasetDescriptor & descriptor, const AugmentConfig & config,
  std::uint64_t seed);

/// Joins the listed actors into a single actor with actors.size() * N joints.
/// Indices beyond the clip's actor count produce an all-zero, invalid body.
SkeletonClip merge_actors(const SkeletonClip & clip, std::span<const std::size_t> actors);

/// All `size`-joint combinations (size 2 or 3) in lexicographic priority order;
/// each tuple lists its joints from higher to lower priority.
std::vector<std::vector<std::size_t>> enumerate_pathlets(
  std::size_t joints, std::size_t size, std::span<const std::size_t> priority);
}  // namespace psf

#endif  // PSF__SKELETON_HPP_
