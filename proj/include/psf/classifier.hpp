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

#ifndef PSF__CLASSIFIER_HPP_
#define PSF__CLASSIFIER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psf/features.hpp"
#include "psf/skeleton.hpp"

namespace psf
{
struct TrainConfig
{
  std::size_t batch_size = 30;
  double momentum = 0.7;
  double learning_rate = 0.01;  // alpha(0)
  double decay = 0.005;  // lambda in alpha(t) = alpha(0) exp(-lambda t)
  std::size_t max_epochs = 200;
  double dropconnect = 0.95;  // probability of dropping an input-to-hidden weight
  std::size_t hidden = 64;
  std::uint64_t seed = 1;

  void validate() const;
  /// "key = value" lines, one per field.
  std::string to_text() const;
  static TrainConfig from_text(const std::string & text);

  bool operator==(const TrainConfig &) const = default;
};

/// Input -> identity hidden layer -> softmax. Weights are row-major:
/// w1 is inputs x hidden, w2 is hidden x classes.
struct LinearNetModel
{
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;
  TrainConfig config;

  static LinearNetModel zeros(std::size_t inputs, std::size_t hidden, std::size_t classes);
  /// Uniform Glorot initialisation scaled for the expected number of kept inputs.
  static LinearNetModel initialize(std::size_t inputs, std::size_t classes, const TrainConfig & config);

  void validate() const;
  bool operator==(const LinearNetModel &) const = default;
};

/// Class probabilities. With `mask` (one 0/1 flag per w1 entry) the hidden
/// layer is (w1 . mask)^T x + b1; without it, inference uses (1 - p) w1.
std::vector<double> forward(
  const LinearNetModel & model, std::span<const double> x,
  std::span<const std::uint8_t> mask = {});

std::size_t predict_class(const LinearNetModel & model, std::span<const double> x);

double lr_schedule(std::size_t epoch, const TrainConfig & config);

struct Gradients
{
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;
  double loss = 0.0;
};

/// Mean cross-entropy and its gradient over `rows`, with every weight kept.
Gradients loss_gradients(
  const LinearNetModel & model, const FeatureMatrix & features, std::span<const int> labels);

/// Largest relative gap between the analytic gradient and central finite
/// differences (step 1e-5) over every parameter.
double gradient_check(const LinearNetModel & model, std::span<const double> x, int label);

struct EpochStats
{
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult
{
  LinearNetModel model;
  std::vector<EpochStats> history;
};

/// Mini-batch SGD with heavy-ball momentum on softmax cross-entropy, with a
/// fresh dropconnect mask over w1 per mini-batch. Deterministic in config.seed.
TrainResult train(
  LinearNetModel model, const FeatureMatrix & features, std::span<const int> labels,
  const TrainConfig & config);

/// Convenience: initialize() then train().
TrainResult train(const FeatureMatrix & features, std::span<const int> labels, std::size_t classes,
                  const TrainConfig & config);

/// Serialised model (magic "SIGNET1", version, shapes, weights, config text).
std::string save_model(const LinearNetModel & model);
LinearNetModel load_model(const std::string & bytes, const std::string & source = "model");

/// Indices of actors sorted by total joint displacement, most active first;
/// ties keep the original order.
std::vector<std::size_t> rank_actors(const SkeletonClip & clip);

struct BodyCountTable
{
  std::vector<double> mean_actors;  // per class
  std::vector<std::uint8_t> multi_body;  // per class, mean > 1.5
};

BodyCountTable stage_partition(
  std::span<const int> labels, std::span<const double> actor_counts, std::size_t classes);

/// A classifier over a subset of the global classes, with its feature scaler.
struct StageClassifier
{
  LinearNetModel model;
  FeatureScaler scaler;
  std::vector<int> classes;  // local index -> global label
};

/// Body-count gate followed by a one-body or multi-body classifier. A stage
/// with no classes is absent; the gate is absent unless both stages exist.
struct TwoStageModel
{
  BodyCountTable table;
  std::optional<StageClassifier> gate;
  std::optional<StageClassifier> single;
  std::optional<StageClassifier> multi;
};

/// Feature vector of the top `bodies` actors of a prepared clip merged into one body.
std::vector<double> body_features(
  const SkeletonClip & clip, std::size_t bodies, const FeatureConfig & config,
  const DatasetDescriptor & descriptor);

struct TwoStageTrainingSet
{
  std::vector<SkeletonClip> clips;  // prepared, labelled
  std::vector<double> actor_counts;  // detected actors per clip
};

TwoStageModel train_two_stage(
  const TwoStageTrainingSet & data, std::size_t classes, const DatasetDescriptor & descriptor,
  const FeatureConfig & features, const AugmentConfig & augment, const TrainConfig & config,
  std::uint64_t augment_seed);

struct Prediction
{
  int label = -1;
  double probability = 0.0;
  bool multi_body = false;
};

/// Serialised composition (magic "SIGTWO1"): the body-count table, then each
/// stage as a presence flag, its class list, scaler and embedded model file.
std::string save_two_stage(const TwoStageModel & model);
TwoStageModel load_two_stage(const std::string & bytes, const std::string & source = "model");

Prediction two_stage_predict(
  const TwoStageModel & model, const SkeletonClip & clip, const FeatureConfig & features,
  const DatasetDescriptor & descriptor);
}  // namespace psf

#endif  // PSF__CLASSIFIER_HPP_
