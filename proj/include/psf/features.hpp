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

#ifndef PSF__FEATURES_HPP_
#define PSF__FEATURES_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "psf/sigcore.hpp"
#include "psf/skeleton.hpp"

namespace psf
{
struct FeatureConfig
{
  std::size_t samples = 10;  // M, frames kept for the spatial blocks
  int pair_level = 2;
  int triple_level = 4;
  int joint_level = 5;  // temporal, per joint, time-augmented
  int evolution_level = 2;  // temporal, per spatial dimension, lead-lag
  int lead_lag_dim = 3;
  bool dpsf = false;
  int dpsf_depth = 3;

  bool use_joints = true;  // S-J
  bool use_pairs = true;  // S-P-PSF
  bool use_triples = true;  // S-T-PSF
  bool use_joint_paths = true;  // T-J-PSF
  bool use_evolutions = true;  // T-S-PSF

  void validate() const;
};

enum class BlockKind
{
  joints,
  pairs,
  triples,
  joint_paths,
  evolutions,
};

/// "S-J", "S-P-PSF", "S-T-PSF", "T-J-PSF" or "T-S-PSF".
const char * block_name(BlockKind kind);

struct FeatureBlock
{
  BlockKind kind;
  int frame = -1;  // sample slot for spatial blocks, -1 for temporal blocks
  std::size_t offset = 0;
  std::size_t width = 0;

  bool operator==(const FeatureBlock &) const = default;
};

/// Where each block lives in the assembled vector, plus the per-part widths.
struct FeatureLayout
{
  std::size_t joints = 0;
  std::size_t dims = 0;
  // Per frame.
  std::size_t d_sj = 0;
  std::size_t d_sp = 0;
  std::size_t d_st = 0;
  // Per clip.
  std::size_t d_tj = 0;
  std::size_t d_ts = 0;
  std::size_t total = 0;
  std::vector<FeatureBlock> blocks;

  std::size_t d_s() const { return d_sp + d_st; }
  std::size_t d_t() const { return d_tj + d_ts; }
  /// Sum of the widths of every block of `kind`.
  std::size_t width(BlockKind kind) const;

  /// One line per block: "<name> <frame> <offset> <width>".
  std::string to_text() const;
  static FeatureLayout from_text(const std::string & text);

  bool operator==(const FeatureLayout &) const = default;
};

/// Layout of assemble_features for N joints in d dimensions; independent of clip length.
FeatureLayout feature_layout(std::size_t joints, std::size_t dims, const FeatureConfig & config);

struct FeatureVector
{
  std::vector<double> values;
  FeatureLayout layout;
};

/// Precomputed pathlets and signature buffers for one (N, d, config).
class SpatialExtractor
{
public:
  SpatialExtractor(const DatasetDescriptor & descriptor, const FeatureConfig & config);

  /// S-J + S-P-PSF + S-T-PSF width of one frame.
  std::size_t width() const { return sj_width_ + psf_width(); }
  /// S-P-PSF + S-T-PSF width of one frame.
  std::size_t psf_width() const;

  /// Writes the spatial features of one N x d pose into `out` (size width()).
  void extract(std::span<const double> pose, std::span<double> out);
  /// Only the pathlet signatures (size psf_width()).
  void extract_psf(std::span<const double> pose, std::span<double> out);

private:
  std::size_t joints_;
  std::size_t dims_;
  FeatureConfig config_;
  std::size_t sj_width_;
  std::vector<std::vector<std::size_t>> pairs_;
  std::vector<std::vector<std::size_t>> triples_;
  SignatureWorkspace pair_workspace_;
  SignatureWorkspace triple_workspace_;
  std::vector<double> points_;
};

/// Spatial features of one frame (S-J, S-P-PSF, S-T-PSF).
std::vector<double> spatial_features(
  std::span<const double> pose, const FeatureConfig & config, const DatasetDescriptor & descriptor);

/// T-J-PSF of one actor over all frames.
std::vector<double> temporal_joint_features(
  const SkeletonClip & clip, std::size_t actor, const FeatureConfig & config);

/// T-S-PSF of one actor over all frames.
std::vector<double> temporal_spatial_features(
  const SkeletonClip & clip, std::size_t actor, const FeatureConfig & config,
  const DatasetDescriptor & descriptor);

/// Full feature vector of one actor: spatial blocks of the M sampled frames,
/// then T-J-PSF, then T-S-PSF.
FeatureVector assemble_features(
  const SkeletonClip & clip, std::size_t actor, const FeatureConfig & config,
  const DatasetDescriptor & descriptor);

/// Row-major matrix of feature vectors sharing one layout.
struct FeatureMatrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  FeatureLayout layout;

  std::span<const double> row(std::size_t r) const
  {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(data).subspan(r * cols, cols); }
  void append(std::span<const double> values);
};

/// Per-dimension maximum absolute training value, zeros replaced by 1.
struct FeatureScaler
{
  std::vector<double> scale;
};

FeatureScaler fit_scaler(const FeatureMatrix & training);
void apply_scaler(const FeatureScaler & scaler, std::span<double> values);
void apply_scaler(const FeatureScaler & scaler, FeatureMatrix & matrix);
}  // namespace psf

#endif  // PSF__FEATURES_HPP_
