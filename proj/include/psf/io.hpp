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

#ifndef PSF__IO_HPP_
#define PSF__IO_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psf/features.hpp"
#include "psf/sigcore.hpp"
#include "psf/skeleton.hpp"

namespace psf::io
{
/// Whole file as bytes. InputError when it cannot be opened.
std::string read_file(const std::filesystem::path & path);
void write_file(const std::filesystem::path & path, std::string_view bytes);

/// One sample per line, comma-separated coordinates; '#' lines and blank
/// lines are skipped. The dimension comes from the first sample.
DiscretePath parse_path(const std::string & text, const std::string & source);

/// Rows "frame,actor,joint,x,y[,z]" sorted by (frame, actor, joint). Missing
/// rows are invalid entries. Frame and actor counts are one past the largest
/// index seen.
SkeletonClip parse_clip(
  const std::string & text, const std::string & source, std::size_t joints, std::size_t dims);
std::string format_clip(const SkeletonClip & clip);

/// Keys: joints, dims, priority, mirror, horizontal_axis, classes.
DatasetDescriptor parse_descriptor(const std::string & text, const std::string & source);
std::string format_descriptor(const DatasetDescriptor & descriptor);

/// Everything `features extract` needs besides the data.
struct ExtractConfig
{
  FeatureConfig features;
  AugmentConfig augment;
  Centering centering = Centering::clip;
};

/// Key-value file; every key is optional and defaults to the standard setting.
ExtractConfig parse_extract_config(const std::string & text, const std::string & source);
std::string format_extract_config(const ExtractConfig & config);

enum class Split
{
  train,
  test,
};

struct ManifestRecord
{
  std::filesystem::path clip;  // resolved against the manifest's directory
  std::string label;
  Split split = Split::train;
  std::size_t actors = 0;
  std::size_t line = 0;
};

/// Lines "clip path, label name, split, actor count".
std::vector<ManifestRecord> parse_manifest(
  const std::string & text, const std::string & source, const std::filesystem::path & base);

/// Index of `label` in descriptor.classes; FormatError naming the record otherwise.
int class_index(const DatasetDescriptor & descriptor, const ManifestRecord & record,
                const std::string & source);

/// "SIGFEAT1", rows and cols as u64, row-major f64 values, then the layout text.
std::string save_features(const FeatureMatrix & matrix);
FeatureMatrix load_features(const std::string & bytes, const std::string & source);

/// A scaler is stored as a one-row feature matrix.
std::string save_scaler(const FeatureScaler & scaler, const FeatureLayout & layout);
FeatureScaler load_scaler(const std::string & bytes, const std::string & source);

/// One integer per line.
std::string format_labels(std::span<const int> labels);
std::vector<int> parse_labels(const std::string & text, const std::string & source);
}  // namespace psf::io

#endif  // PSF__IO_HPP_
