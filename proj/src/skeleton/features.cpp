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

#include "psf/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psf/error.hpp"
#include "psf/transforms.hpp"

namespace psf
{
namespace
{
std::size_t choose(std::size_t n, std::size_t k)
{
  if (k > n) {
    return 0;
  }
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

std::size_t sig_width(std::size_t dim, int level)
{
  return static_cast<std::size_t>(signature_dimension(dim, static_cast<std::uint64_t>(level), false));
}

std::size_t window_count(const FeatureConfig & config)
{
  return config.dpsf ? (std::size_t{1} << config.dpsf_depth) - 1 : 1;
}

// Whole-interval signature, or the concatenation over `windows` when given.
void windowed_signature(
  PathView path, SignatureWorkspace & ws, const std::vector<IndexWindow> * windows,
  std::span<double> out)
{
  if (windows == nullptr) {
    ws.compute(path, out);
    return;
  }
  const std::size_t w = ws.size();
  for (std::size_t k = 0; k < windows->size(); ++k) {
    const auto & win = (*windows)[k];
    ws.compute(path.slice(win.start, win.end), out.subspan(k * w, w));
  }
}

void check_shapes(
  const SkeletonClip & clip, std::size_t actor, const DatasetDescriptor * descriptor)
{
  if (actor >= clip.actors) {
    throw InputError(
      "actor " + std::to_string(actor) + " out of range for clip with " +
      std::to_string(clip.actors) + " actors");
  }
  if (descriptor != nullptr && (descriptor->joints != clip.joints || descriptor->dims != clip.dims)) {
    throw InputError(
      "descriptor is for N=" + std::to_string(descriptor->joints) + ", d=" +
      std::to_string(descriptor->dims) + " but the clip has N=" + std::to_string(clip.joints) +
      ", d=" + std::to_string(clip.dims));
  }
}

// F x D_S matrix of pathlet signatures for every frame of one actor.
std::vector<double> evolution_matrix(
  const SkeletonClip & clip, std::size_t actor, SpatialExtractor & extractor)
{
  const std::size_t ds = extractor.psf_width();
  std::vector<double> mat(clip.frames * ds);
  for (std::size_t f = 0; f < clip.frames; ++f) {
    extractor.extract_psf(clip.pose(f, actor), std::span<double>(mat).subspan(f * ds, ds));
  }
  return mat;
}

void evolution_features(
  std::span<const double> mat, std::size_t frames, const FeatureConfig & config,
  std::span<double> out)
{
  const std::size_t ds = frames == 0 ? 0 : mat.size() / frames;
  if (ds == 0) {
    return;
  }
  std::vector<IndexWindow> windows;
  if (config.dpsf) {
    windows = dyadic_windows(frames, config.dpsf_depth);
  }
  SignatureWorkspace ws(static_cast<std::size_t>(config.lead_lag_dim), config.evolution_level);
  const std::size_t per = ws.size() * window_count(config);
  std::vector<double> series(frames);
  std::vector<double> lifted;
  for (std::size_t s = 0; s < ds; ++s) {
    for (std::size_t f = 0; f < frames; ++f) {
      series[f] = mat[f * ds + s];
    }
    lead_lag_into(series, config.lead_lag_dim, lifted);
    PathView path{lifted, static_cast<std::size_t>(config.lead_lag_dim)};
    windowed_signature(path, ws, config.dpsf ? &windows : nullptr, out.subspan(s * per, per));
  }
}
}  // namespace

void FeatureConfig::validate() const
{
  if (samples < 1) {
    throw InputError("feature config: M must be >= 1");
  }
  if (pair_level < 1 || triple_level < 1 || joint_level < 1 || evolution_level < 1) {
    throw InputError("feature config: signature levels must be >= 1");
  }
  if (lead_lag_dim < 1) {
    throw InputError("feature config: lead-lag dimension must be >= 1");
  }
  if (dpsf && (dpsf_depth < 1 || dpsf_depth > 16)) {
    throw InputError("feature config: dpsf depth must be in [1, 16]");
  }
}

const char * block_name(BlockKind kind)
{
  switch (kind) {
    case BlockKind::joints:
      return "S-J";
    case BlockKind::pairs:
      return "S-P-PSF";
    case BlockKind::triples:
      return "S-T-PSF";
    case BlockKind::joint_paths:
      return "T-J-PSF";
    case BlockKind::evolutions:
      return "T-S-PSF";
  }
  return "?";
}

std::size_t FeatureLayout::width(BlockKind kind) const
{
  std::size_t w = 0;
  for (const auto & b : blocks) {
    if (b.kind == kind) {
      w += b.width;
    }
  }
  return w;
}

std::string FeatureLayout::to_text() const
{
  std::ostringstream os;
  os << "layout joints=" << joints << " dims=" << dims << " d_sj=" << d_sj << " d_sp=" << d_sp
     << " d_st=" << d_st << " d_tj=" << d_tj << " d_ts=" << d_ts << " total=" << total << '\n';
  for (const auto & b : blocks) {
    os << block_name(b.kind) << ' ' << b.frame << ' ' << b.offset << ' ' << b.width << '\n';
  }
  return os.str();
}

FeatureLayout FeatureLayout::from_text(const std::string & text)
{
  FeatureLayout layout;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("layout ", 0) != 0) {
    throw FormatError("feature layout: missing 'layout' header");
  }
  {
    std::istringstream hs(line.substr(7));
    std::string field;
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) {
        throw FormatError("feature layout: malformed header field '" + field + "'");
      }
      const std::string key = field.substr(0, eq);
      std::size_t value = 0;
      try {
        value = std::stoull(field.substr(eq + 1));
      } catch (const std::exception &) {
        throw FormatError("feature layout: bad number in '" + field + "'");
      }
      if (key == "joints") layout.joints = value;
      else if (key == "dims") layout.dims = value;
      else if (key == "d_sj") layout.d_sj = value;
      else if (key == "d_sp") layout.d_sp = value;
      else if (key == "d_st") layout.d_st = value;
      else if (key == "d_tj") layout.d_tj = value;
      else if (key == "d_ts") layout.d_ts = value;
      else if (key == "total") layout.total = value;
      else throw FormatError("feature layout: unknown header key '" + key + "'");
    }
  }
  const BlockKind kinds[] = {BlockKind::joints, BlockKind::pairs, BlockKind::triples,
                             BlockKind::joint_paths, BlockKind::evolutions};
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ls(line);
    std::string name;
    FeatureBlock block{BlockKind::joints};
    if (!(ls >> name >> block.frame >> block.offset >> block.width)) {
      throw FormatError("feature layout: malformed block line '" + line + "'");
    }
    bool known = false;
    for (auto k : kinds) {
      if (name == block_name(k)) {
        block.kind = k;
        known = true;
      }
    }
    if (!known) {
      throw FormatError("feature layout: unknown block '" + name + "'");
    }
    layout.blocks.push_back(block);
  }
  return layout;
}

FeatureLayout feature_layout(std::size_t joints, std::size_t dims, const FeatureConfig & config)
{
  config.validate();
  FeatureLayout layout;
  layout.joints = joints;
  layout.dims = dims;
  layout.d_sj = config.use_joints ? joints * dims : 0;
  layout.d_sp = config.use_pairs ? choose(joints, 2) * sig_width(dims, config.pair_level) : 0;
  layout.d_st = config.use_triples ? choose(joints, 3) * sig_width(dims, config.triple_level) : 0;
  const std::size_t windows = window_count(config);
  layout.d_tj = config.use_joint_paths ? joints * sig_width(dims + 1, config.joint_level) * windows : 0;
  layout.d_ts = config.use_evolutions
                  ? layout.d_s() * sig_width(static_cast<std::size_t>(config.lead_lag_dim),
                                             config.evolution_level) * windows
                  : 0;

  std::size_t offset = 0;
  auto add = [&](BlockKind kind, int frame, std::size_t width) {
    if (width > 0) {
      layout.blocks.push_back({kind, frame, offset, width});
      offset += width;
    }
  };
  for (std::size_t m = 0; m < config.samples; ++m) {
    const int frame = static_cast<int>(m);
    add(BlockKind::joints, frame, layout.d_sj);
    add(BlockKind::pairs, frame, layout.d_sp);
    add(BlockKind::triples, frame, layout.d_st);
  }
  add(BlockKind::joint_paths, -1, layout.d_tj);
  add(BlockKind::evolutions, -1, layout.d_ts);
  layout.total = offset;
  return layout;
}

SpatialExtractor::SpatialExtractor(const DatasetDescriptor & descriptor, const FeatureConfig & config)
: joints_(descriptor.joints),
  dims_(descriptor.dims),
  config_(config),
  sj_width_(config.use_joints ? descriptor.joints * descriptor.dims : 0),
  pair_workspace_(descriptor.dims, config.pair_level),
  triple_workspace_(descriptor.dims, config.triple_level),
  points_(3 * descriptor.dims)
{
  config.validate();
  if (config.use_pairs) {
    pairs_ = enumerate_pathlets(joints_, 2, descriptor.priority);
  }
  if (config.use_triples) {
    triples_ = enumerate_pathlets(joints_, 3, descriptor.priority);
  }
}

std::size_t SpatialExtractor::psf_width() const
{
  return pairs_.size() * pair_workspace_.size() + triples_.size() * triple_workspace_.size();
}

void SpatialExtractor::extract_psf(std::span<const double> pose, std::span<double> out)
{
  if (pose.size() != joints_ * dims_ || out.size() != psf_width()) {
    throw InputError("spatial extractor: pose or output has the wrong size");
  }
  std::size_t offset = 0;
  auto run = [&](const std::vector<std::vector<std::size_t>> & pathlets, SignatureWorkspace & ws) {
    for (const auto & tuple : pathlets) {
      for (std::size_t k = 0; k < tuple.size(); ++k) {
        std::copy_n(pose.begin() + static_cast<std::ptrdiff_t>(tuple[k] * dims_), dims_,
                    points_.begin() + static_cast<std::ptrdiff_t>(k * dims_));
      }
      PathView path{std::span<const double>(points_).first(tuple.size() * dims_), dims_};
      ws.compute(path, out.subspan(offset, ws.size()));
      offset += ws.size();
    }
  };
  run(pairs_, pair_workspace_);
  run(triples_, triple_workspace_);
}

void SpatialExtractor::extract(std::span<const double> pose, std::span<double> out)
{
  if (out.size() != width()) {
    throw InputError("spatial extractor: output has the wrong size");
  }
  std::copy_n(pose.begin(), sj_width_, out.begin());
  extract_psf(pose, out.subspan(sj_width_));
}

std::vector<double> spatial_features(
  std::span<const double> pose, const FeatureConfig & config, const DatasetDescriptor & descriptor)
{
  SpatialExtractor extractor(descriptor, config);
  std::vector<double> out(extractor.width());
  extractor.extract(pose, out);
  return out;
}

std::vector<double> temporal_joint_features(
  const SkeletonClip & clip, std::size_t actor, const FeatureConfig & config)
{
  config.validate();
  check_shapes(clip, actor, nullptr);
  const std::size_t d = clip.dims;
  std::vector<IndexWindow> windows;
  if (config.dpsf) {
    windows = dyadic_windows(clip.frames, config.dpsf_depth);
  }
  SignatureWorkspace ws(d + 1, config.joint_level);
  const std::size_t per = ws.size() * window_count(config);
  std::vector<double> out(clip.joints * per);
  std::vector<double> raw(clip.frames * d);
  std::vector<double> timed;
  for (std::size_t j = 0; j < clip.joints; ++j) {
    for (std::size_t f = 0; f < clip.frames; ++f) {
      auto p = clip.joint(f, actor, j);
      std::copy(p.begin(), p.end(), raw.begin() + static_cast<std::ptrdiff_t>(f * d));
    }
    add_time_into(PathView{raw, d}, timed);
    windowed_signature(PathView{timed, d + 1}, ws, config.dpsf ? &windows : nullptr,
                       std::span<double>(out).subspan(j * per, per));
  }
  return out;
}

std::vector<double> temporal_spatial_features(
  const SkeletonClip & clip, std::size_t actor, const FeatureConfig & config,
  const DatasetDescriptor & descriptor)
{
  check_shapes(clip, actor, &descriptor);
  SpatialExtractor extractor(descriptor, config);
  const auto mat = evolution_matrix(clip, actor, extractor);
  const auto layout = feature_layout(clip.joints, clip.dims, config);
  std::vector<double> out(layout.d_ts);
  evolution_features(mat, clip.frames, config, out);
  return out;
}

FeatureVector assemble_features(
  const SkeletonClip & clip, std::size_t actor, const FeatureConfig & config,
  const DatasetDescriptor & descriptor)
{
  check_shapes(clip, actor, &descriptor);
  FeatureVector fv;
  fv.layout = feature_layout(clip.joints, clip.dims, config);
  fv.values.assign(fv.layout.total, 0.0);
  std::span<double> out(fv.values);

  SpatialExtractor extractor(descriptor, config);
  const std::size_t per_frame = extractor.width();
  const auto frames = uniform_sample(clip.frames, config.samples);
  for (std::size_t m = 0; m < frames.size(); ++m) {
    if (per_frame > 0) {
      extractor.extract(clip.pose(frames[m], actor), out.subspan(m * per_frame, per_frame));
    }
  }
  std::size_t offset = frames.size() * per_frame;
  if (fv.layout.d_tj > 0) {
    const auto tj = temporal_joint_features(clip, actor, config);
    std::copy(tj.begin(), tj.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += tj.size();
  }
  if (fv.layout.d_ts > 0) {
    const auto mat = evolution_matrix(clip, actor, extractor);
    evolution_features(mat, clip.frames, config, out.subspan(offset, fv.layout.d_ts));
    offset += fv.layout.d_ts;
  }
  if (offset != fv.layout.total) {
    throw std::logic_error("assembled feature width disagrees with its layout");
  }
  return fv;
}

void FeatureMatrix::append(std::span<const double> values)
{
  if (rows == 0 && cols == 0) {
    cols = values.size();
  }
  if (values.size() != cols) {
    throw InputError(
      "feature row has " + std::to_string(values.size()) + " values, expected " +
      std::to_string(cols));
  }
  data.insert(data.end(), values.begin(), values.end());
  ++rows;
}

FeatureScaler fit_scaler(const FeatureMatrix & training)
{
  FeatureScaler scaler;
  scaler.scale.assign(training.cols, 0.0);
  for (std::size_t r = 0; r < training.rows; ++r) {
    auto row = training.row(r);
    for (std::size_t c = 0; c < training.cols; ++c) {
      scaler.scale[c] = std::max(scaler.scale[c], std::abs(row[c]));
    }
  }
  for (auto & s : scaler.scale) {
    if (s == 0.0) {
      s = 1.0;
    }
  }
  return scaler;
}

void apply_scaler(const FeatureScaler & scaler, std::span<double> values)
{
  if (values.size() != scaler.scale.size()) {
    throw InputError("scaler width does not match the feature vector");
  }
  for (std::size_t c = 0; c < values.size(); ++c) {
    values[c] /= scaler.scale[c];
  }
}

void apply_scaler(const FeatureScaler & scaler, FeatureMatrix & matrix)
{
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    apply_scaler(scaler, matrix.row(r));
  }
}
}  // namespace psf
