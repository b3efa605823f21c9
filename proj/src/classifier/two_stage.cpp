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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "psf/binary.hpp"
#include "psf/classifier.hpp"
#include "psf/error.hpp"

namespace psf
{
namespace
{
constexpr char kTwoStageMagic[] = "SIGTWO1";
constexpr std::uint8_t kTwoStageVersion = 1;

std::vector<std::size_t> top_actors(const SkeletonClip & clip, std::size_t bodies)
{
  auto order = rank_actors(clip);
  std::vector<std::size_t> picked(bodies);
  for (std::size_t b = 0; b < bodies; ++b) {
    // Past the clip's actors merge_actors yields an all-zero body.
    picked[b] = b < order.size() ? order[b] : clip.actors + b;
  }
  return picked;
}

StageClassifier fit_stage(
  const std::vector<const SkeletonClip *> & clips, const std::vector<int> & global_labels,
  const std::vector<int> & stage_classes, std::size_t bodies, const DatasetDescriptor & descriptor,
  const FeatureConfig & features, const AugmentConfig & augment, const TrainConfig & config,
  std::uint64_t seed)
{
  std::vector<int> local(
    static_cast<std::size_t>(*std::max_element(global_labels.begin(), global_labels.end())) + 1,
    -1);
  for (std::size_t k = 0; k < stage_classes.size(); ++k) {
    if (static_cast<std::size_t>(stage_classes[k]) < local.size()) {
      local[static_cast<std::size_t>(stage_classes[k])] = static_cast<int>(k);
    }
  }

  FeatureMatrix matrix;
  std::vector<int> labels;
  std::seed_seq seq{seed, static_cast<std::uint64_t>(bodies)};
  std::vector<std::uint64_t> seeds(clips.size());
  seq.generate(seeds.begin(), seeds.end());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const int y = local[static_cast<std::size_t>(global_labels[i])];
    for (const auto & copy : augment_clip(*clips[i], descriptor, augment, seeds[i])) {
      matrix.append(body_features(copy, bodies, features, descriptor));
      labels.push_back(y);
    }
  }
  StageClassifier stage;
  stage.classes = stage_classes;
  stage.scaler = fit_scaler(matrix);
  apply_scaler(stage.scaler, matrix);
  stage.model = train(matrix, labels, stage_classes.size(), config).model;
  return stage;
}

std::pair<std::size_t, double> classify(
  const StageClassifier & stage, const SkeletonClip & clip, std::size_t bodies,
  const FeatureConfig & features, const DatasetDescriptor & descriptor)
{
  auto x = body_features(clip, bodies, features, descriptor);
  apply_scaler(stage.scaler, x);
  auto p = forward(stage.model, x);
  const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  return {best, p[best]};
}
}  // namespace

std::vector<std::size_t> rank_actors(const SkeletonClip & clip)
{
  std::vector<double> movement(clip.actors, 0.0);
  for (std::size_t a = 0; a < clip.actors; ++a) {
    for (std::size_t f = 1; f < clip.frames; ++f) {
      for (std::size_t j = 0; j < clip.joints; ++j) {
        if (!clip.is_valid(f - 1, a, j) || !clip.is_valid(f, a, j)) continue;
        auto p = clip.joint(f - 1, a, j);
        auto q = clip.joint(f, a, j);
        double sq = 0.0;
        for (std::size_t c = 0; c < clip.dims; ++c) sq += (q[c] - p[c]) * (q[c] - p[c]);
        movement[a] += std::sqrt(sq);
      }
    }
  }
  std::vector<std::size_t> order(clip.actors);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return movement[x] > movement[y];
  });
  return order;
}

BodyCountTable stage_partition(
  std::span<const int> labels, std::span<const double> actor_counts, std::size_t classes)
{
  if (labels.size() != actor_counts.size()) {
    throw InputError("stage_partition needs one actor count per label");
  }
  std::vector<double> sum(classes, 0.0);
  std::vector<std::size_t> count(classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw InputError("label " + std::to_string(labels[i]) + " outside the class range");
    }
    sum[static_cast<std::size_t>(labels[i])] += actor_counts[i];
    ++count[static_cast<std::size_t>(labels[i])];
  }
  BodyCountTable table;
  table.mean_actors.resize(classes, 0.0);
  table.multi_body.resize(classes, 0);
  for (std::size_t c = 0; c < classes; ++c) {
    if (count[c] != 0) {
      table.mean_actors[c] = sum[c] / static_cast<double>(count[c]);
    }
    table.multi_body[c] = table.mean_actors[c] > 1.5 ? 1 : 0;
  }
  return table;
}

std::vector<double> body_features(
  const SkeletonClip & clip, std::size_t bodies, const FeatureConfig & config,
  const DatasetDescriptor & descriptor)
{
  if (bodies < 1) {
    throw InputError("body_features needs at least one body");
  }
  const auto merged = merge_actors(clip, top_actors(clip, bodies));
  const auto desc = bodies == 1 ? descriptor : descriptor.merged(bodies);
  return assemble_features(merged, 0, config, desc).values;
}

TwoStageModel train_two_stage(
  const TwoStageTrainingSet & data, std::size_t classes, const DatasetDescriptor & descriptor,
  const FeatureConfig & features, const AugmentConfig & augment, const TrainConfig & config,
  std::uint64_t augment_seed)
{
  if (data.clips.empty()) {
    throw InputError("training set is empty");
  }
  if (data.actor_counts.size() != data.clips.size()) {
    throw InputError("two-stage training needs one actor count per clip");
  }
  std::vector<int> labels;
  for (const auto & clip : data.clips) {
    if (!clip.label) {
      throw InputError("training clip '" + clip.id + "' has no label");
    }
    labels.push_back(*clip.label);
  }

  TwoStageModel model;
  model.table = stage_partition(labels, data.actor_counts, classes);

  std::vector<int> single_classes, multi_classes;
  for (std::size_t c = 0; c < classes; ++c) {
    (model.table.multi_body[c] ? multi_classes : single_classes).push_back(static_cast<int>(c));
  }

  std::vector<const SkeletonClip *> single_clips, multi_clips, all_clips;
  std::vector<int> single_labels, multi_labels, gate_labels;
  for (std::size_t i = 0; i < data.clips.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    const bool multi = model.table.multi_body[y] != 0;
    (multi ? multi_clips : single_clips).push_back(&data.clips[i]);
    (multi ? multi_labels : single_labels).push_back(labels[i]);
    all_clips.push_back(&data.clips[i]);
    gate_labels.push_back(multi ? 1 : 0);
  }

  if (!single_clips.empty()) {
    model.single = fit_stage(
      single_clips, single_labels, single_classes, 1, descriptor, features, augment, config,
      augment_seed);
  }
  if (!multi_clips.empty()) {
    model.multi = fit_stage(
      multi_clips, multi_labels, multi_classes, 2, descriptor, features, augment, config,
      augment_seed + 1);
  }
  if (model.single && model.multi) {
    model.gate = fit_stage(
      all_clips, gate_labels, {0, 1}, 2, descriptor, features, augment, config, augment_seed + 2);
  }
  return model;
}

std::string save_two_stage(const TwoStageModel & model)
{
  const std::size_t classes = model.table.mean_actors.size();
  if (model.table.multi_body.size() != classes) {
    throw InputError("body-count table is inconsistent");
  }
  std::string out(kTwoStageMagic, sizeof(kTwoStageMagic) - 1);
  out.push_back(static_cast<char>(kTwoStageVersion));
  binary::put_u64(out, classes);
  binary::put_f64s(out, model.table.mean_actors);
  for (auto m : model.table.multi_body) out.push_back(static_cast<char>(m));
  for (const auto * stage : {&model.gate, &model.single, &model.multi}) {
    out.push_back(stage->has_value() ? 1 : 0);
    if (!stage->has_value()) continue;
    const auto & s = **stage;
    binary::put_u64(out, s.classes.size());
    for (int c : s.classes) binary::put_u64(out, static_cast<std::uint64_t>(c));
    binary::put_u64(out, s.scaler.scale.size());
    binary::put_f64s(out, s.scaler.scale);
    const std::string bytes = save_model(s.model);
    binary::put_u64(out, bytes.size());
    out += bytes;
  }
  return out;
}

TwoStageModel load_two_stage(const std::string & bytes, const std::string & source)
{
  binary::Reader in(bytes, source);
  if (in.bytes(sizeof(kTwoStageMagic) - 1, "magic") != std::string_view(kTwoStageMagic)) {
    throw FormatError(source + ": not a two-stage model file (bad magic)");
  }
  if (const auto v = in.u8("version"); v != kTwoStageVersion) {
    in.fail("unsupported two-stage model version " + std::to_string(v));
  }
  TwoStageModel model;
  const std::uint64_t classes = in.u64("class count");
  if (classes > in.remaining() / 9) {
    in.fail("class count does not fit the file");
  }
  model.table.mean_actors.resize(classes);
  in.f64s(model.table.mean_actors, "mean actor counts");
  for (std::uint64_t c = 0; c < classes; ++c) {
    model.table.multi_body.push_back(in.u8("multi-body flags"));
  }
  const char * names[] = {"gate", "one-body stage", "multi-body stage"};
  std::optional<StageClassifier> * stages[] = {&model.gate, &model.single, &model.multi};
  for (int k = 0; k < 3; ++k) {
    if (in.u8(names[k]) == 0) continue;
    StageClassifier s;
    const std::uint64_t n = in.u64("stage class count");
    if (n > in.remaining() / 8) in.fail("stage class count does not fit the file");
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto c = in.u64("stage class");
      if (c >= std::max<std::uint64_t>(classes, 2)) in.fail("stage class out of range");
      s.classes.push_back(static_cast<int>(c));
    }
    const std::uint64_t width = in.u64("scaler width");
    if (width > in.remaining() / 8) in.fail("scaler width does not fit the file");
    s.scaler.scale.resize(width);
    in.f64s(s.scaler.scale, "scaler");
    const std::uint64_t len = in.u64("model length");
    s.model = load_model(std::string(in.bytes(len, "model")), source + " (" + names[k] + ")");
    if (s.model.inputs != width || s.model.classes != n) {
      throw FormatError(source + ": " + names[k] + " shapes disagree with its scaler or classes");
    }
    *stages[k] = std::move(s);
  }
  if (in.remaining() != 0) {
    in.fail("trailing bytes after the last stage");
  }
  if (!model.single && !model.multi) {
    throw FormatError(source + ": two-stage model has no classifiers");
  }
  return model;
}

Prediction two_stage_predict(
  const TwoStageModel & model, const SkeletonClip & clip, const FeatureConfig & features,
  const DatasetDescriptor & descriptor)
{
  if (clip.detected_actors() == 0) {
    throw InputError("clip '" + clip.id + "' has no detected actors");
  }
  if (!model.single && !model.multi) {
    throw InputError("two-stage model has no classifiers");
  }
  bool multi = !model.single;
  if (model.gate) {
    multi = model.gate->classes[classify(*model.gate, clip, 2, features, descriptor).first] == 1;
  }
  const auto & stage = multi ? *model.multi : *model.single;
  const auto [local, probability] = classify(stage, clip, multi ? 2 : 1, features, descriptor);
  return {stage.classes[local], probability, multi};
}
}  // namespace psf
