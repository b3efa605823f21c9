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

#include "psf_cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <random>

#include "psf/classifier.hpp"
#include "psf/error.hpp"
#include "psf/io.hpp"
#include "psf/transforms.hpp"

namespace psf::cli
{
namespace
{
namespace fs = std::filesystem;

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- datasets

struct Dataset
{
  DatasetDescriptor descriptor;
  io::ExtractConfig config;
  std::vector<io::ManifestRecord> records;
  std::string manifest;
};

Dataset load_dataset(
  const std::string & manifest, const std::string & descriptor, const std::string & config)
{
  Dataset d;
  d.manifest = manifest;
  d.descriptor = io::parse_descriptor(io::read_file(descriptor), descriptor);
  if (d.descriptor.classes.empty()) {
    throw FormatError(descriptor + ": no classes declared");
  }
  if (!config.empty()) {
    d.config = io::parse_extract_config(io::read_file(config), config);
  }
  d.records = io::parse_manifest(
    io::read_file(manifest), manifest, fs::path(manifest).parent_path());
  return d;
}

SkeletonClip load_clip(const fs::path & path, const DatasetDescriptor & descriptor)
{
  return io::parse_clip(io::read_file(path), path.string(), descriptor.joints, descriptor.dims);
}

// Clip seeds derived from the user seed and the record position.
std::uint64_t clip_seed(std::uint64_t seed, std::size_t index)
{
  std::seed_seq seq{
    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t{words[0]} << 32) | words[1];
}

void print_layout(std::ostream & out, const FeatureLayout & l, const FeatureConfig & c)
{
  out << "layout: N=" << l.joints << " d=" << l.dims << " M=" << c.samples
      << (c.dpsf ? " dpsf depth=" + std::to_string(c.dpsf_depth) : std::string()) << "\n";
  out << "  D_SJ = " << l.d_sj << " per frame\n";
  out << "  D_SP = " << l.d_sp << " per frame\n";
  out << "  D_ST = " << l.d_st << " per frame\n";
  out << "  D_S  = " << l.d_s() << " per frame\n";
  out << "  D_TJ = " << l.d_tj << "\n";
  out << "  D_TS = " << l.d_ts << "\n";
  out << "  D_T  = " << l.d_t() << "\n";
  out << "  D    = " << l.total << "\n";
}

// ---------------------------------------------------------------- sig

struct SigOptions
{
  std::string path;
  int level = 0;
  bool add_time = false;
  int lead_lag = 0;
};

int cmd_sig(const SigOptions & o, std::ostream & out)
{
  DiscretePath path = io::parse_path(io::read_file(o.path), o.path);
  if (o.lead_lag > 0) {
    if (path.dim() != 1) {
      throw InputError(
        "--lead-lag needs a one-dimensional path, '" + o.path + "' has " +
        std::to_string(path.dim()) + " coordinates per sample");
    }
    path = lead_lag(path.coords(), o.lead_lag);
  }
  if (o.add_time) {
    path = add_time(path);
  }
  const auto sig = path_signature(path, o.level);
  out << "dim " << sig.dim() << " level " << sig.level() << " coefficients " << sig.size() << "\n";
  for (int k = 1; k <= sig.level(); ++k) {
    out << "level " << k << ":";
    for (double c : sig.level_block(k)) {
      out << " " << fmt(c);
    }
    out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- features

struct ExtractOptions
{
  std::string manifest;
  std::string descriptor;
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t actors = 1;
};

int cmd_extract(const ExtractOptions & o, std::ostream & out)
{
  if (o.actors < 1) {
    throw InputError("--actors must be at least 1");
  }
  const Dataset data = load_dataset(o.manifest, o.descriptor, o.config);
  const auto & fc = data.config.features;
  const FeatureLayout layout =
    feature_layout(o.actors * data.descriptor.joints, data.descriptor.dims, fc);

  FeatureMatrix train, test;
  train.cols = test.cols = layout.total;
  train.layout = test.layout = layout;
  std::vector<int> train_labels, test_labels;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto & r = data.records[i];
    const int label = io::class_index(data.descriptor, r, data.manifest);
    const auto clip = prepare_clip(load_clip(r.clip, data.descriptor), data.config.centering);
    if (r.split == io::Split::test) {
      test.append(body_features(clip, o.actors, fc, data.descriptor));
      test_labels.push_back(label);
      continue;
    }
    for (const auto & copy :
         augment_clip(clip, data.descriptor, data.config.augment, clip_seed(o.seed, i))) {
      train.append(body_features(copy, o.actors, fc, data.descriptor));
      train_labels.push_back(label);
    }
  }
  if (train.rows == 0) {
    throw InputError(o.manifest + ": no training clips");
  }
  const FeatureScaler scaler = fit_scaler(train);
  apply_scaler(scaler, train);
  apply_scaler(scaler, test);

  io::write_file(o.out + ".train.sigfeat", io::save_features(train));
  io::write_file(o.out + ".train.labels", io::format_labels(train_labels));
  io::write_file(o.out + ".test.sigfeat", io::save_features(test));
  io::write_file(o.out + ".test.labels", io::format_labels(test_labels));
  io::write_file(o.out + ".scaler.sigfeat", io::save_scaler(scaler, layout));

  print_layout(out, layout, fc);
  out << "train rows " << train.rows << ", test rows " << test.rows << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainOptions
{
  std::string features;
  std::string labels;
  std::string config;
  std::string model;
  std::string history;
  std::size_t classes = 0;
  std::optional<std::uint64_t> seed;
  bool two_stage = false;
  std::string manifest;
  std::string descriptor;
  std::string extract_config;
};

TrainConfig load_train_config(const std::string & path, std::optional<std::uint64_t> seed)
{
  TrainConfig c;
  if (!path.empty()) {
    try {
      c = TrainConfig::from_text(io::read_file(path));
    } catch (const FormatError & e) {
      throw FormatError(path + ": " + e.what());
    } catch (const InputError & e) {
      throw FormatError(path + ": " + e.what());
    }
  }
  if (seed) c.seed = *seed;
  return c;
}

struct ClipSet
{
  std::vector<SkeletonClip> clips;
  std::vector<double> actor_counts;
};

ClipSet load_split(const Dataset & data, io::Split split)
{
  ClipSet set;
  for (const auto & r : data.records) {
    if (r.split != split) continue;
    auto clip = prepare_clip(load_clip(r.clip, data.descriptor), data.config.centering);
    clip.label = io::class_index(data.descriptor, r, data.manifest);
    set.clips.push_back(std::move(clip));
    set.actor_counts.push_back(static_cast<double>(r.actors));
  }
  return set;
}

int cmd_train(const TrainOptions & o, std::ostream & out)
{
  const TrainConfig config = load_train_config(o.config, o.seed);
  if (o.two_stage) {
    const Dataset data = load_dataset(o.manifest, o.descriptor, o.extract_config);
    auto set = load_split(data, io::Split::train);
    if (set.clips.empty()) {
      throw InputError(o.manifest + ": no training clips");
    }
    const TwoStageModel model = train_two_stage(
      {std::move(set.clips), std::move(set.actor_counts)}, data.descriptor.classes.size(),
      data.descriptor, data.config.features, data.config.augment, config, config.seed);
    io::write_file(o.model, save_two_stage(model));
    for (std::size_t c = 0; c < model.table.mean_actors.size(); ++c) {
      out << data.descriptor.classes[c] << ": mean actors " << fmt(model.table.mean_actors[c])
          << (model.table.multi_body[c] ? " multi-body" : " one-body") << "\n";
    }
    out << "stages:" << (model.gate ? " gate" : "") << (model.single ? " one-body" : "")
        << (model.multi ? " multi-body" : "") << "\n";
    return 0;
  }

  const FeatureMatrix x = io::load_features(io::read_file(o.features), o.features);
  const std::vector<int> y = io::parse_labels(io::read_file(o.labels), o.labels);
  if (y.size() != x.rows) {
    throw FormatError(
      o.labels + ": " + std::to_string(y.size()) + " labels for " + std::to_string(x.rows) +
      " feature rows");
  }
  std::size_t classes = o.classes;
  if (classes == 0) {
    classes = y.empty() ? 0 : static_cast<std::size_t>(*std::max_element(y.begin(), y.end())) + 1;
  }
  const TrainResult result = train(x, y, classes, config);
  io::write_file(o.model, save_model(result.model));
  if (!o.history.empty()) {
    std::string h = "epoch\tlr\tloss\taccuracy\n";
    for (const auto & e : result.history) {
      h += std::to_string(e.epoch) + "\t" + fmt(e.learning_rate) + "\t" + fmt(e.loss) + "\t" +
           fmt(e.accuracy) + "\n";
    }
    io::write_file(o.history, h);
  }
  const auto & last = result.history.back();
  out << "epochs " << result.history.size() << ", final loss " << fmt(last.loss)
      << ", train accuracy " << fmt(last.accuracy) << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions
{
  std::string model;
  std::string features;
  std::string labels;
  std::string descriptor;
  bool two_stage = false;
  std::string manifest;
  std::string extract_config;
};

void print_report(
  std::ostream & out, const std::vector<std::vector<std::size_t>> & confusion,
  const std::vector<std::string> & names)
{
  const std::size_t C = confusion.size();
  std::size_t correct = 0, total = 0;
  for (std::size_t t = 0; t < C; ++t) {
    for (std::size_t p = 0; p < C; ++p) {
      total += confusion[t][p];
      if (t == p) correct += confusion[t][p];
    }
  }
  const double accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  out << "accuracy " << fmt(accuracy) << " (" << correct << "/" << total << ")\n";
  out << "per-class accuracy:\n";
  for (std::size_t t = 0; t < C; ++t) {
    std::size_t row = 0;
    for (std::size_t p = 0; p < C; ++p) row += confusion[t][p];
    out << "  " << names[t] << " ";
    if (row == 0) {
      out << "n/a (0 samples)\n";
    } else {
      out << fmt(static_cast<double>(confusion[t][t]) / static_cast<double>(row)) << " ("
          << confusion[t][t] << "/" << row << ")\n";
    }
  }
  out << "confusion matrix (rows: true, columns: predicted):\n";
  for (std::size_t t = 0; t < C; ++t) {
    out << " ";
    for (std::size_t p = 0; p < C; ++p) out << " " << std::setw(6) << confusion[t][p];
    out << "  " << names[t] << "\n";
  }
}

std::vector<std::string> class_names(const std::string & descriptor, std::size_t classes)
{
  std::vector<std::string> names;
  if (!descriptor.empty()) {
    names = io::parse_descriptor(io::read_file(descriptor), descriptor).classes;
    if (names.size() != classes) {
      throw InputError(
        descriptor + " declares " + std::to_string(names.size()) + " classes, the model has " +
        std::to_string(classes));
    }
    return names;
  }
  for (std::size_t c = 0; c < classes; ++c) names.push_back(std::to_string(c));
  return names;
}

int cmd_eval(const EvalOptions & o, std::ostream & out)
{
  if (o.two_stage) {
    const Dataset data = load_dataset(o.manifest, o.descriptor, o.extract_config);
    const TwoStageModel model = load_two_stage(io::read_file(o.model), o.model);
    const std::size_t C = data.descriptor.classes.size();
    if (model.table.mean_actors.size() != C) {
      throw InputError(o.model + ": model and descriptor disagree on the class count");
    }
    const auto set = load_split(data, io::Split::test);
    std::vector<std::vector<std::size_t>> confusion(C, std::vector<std::size_t>(C, 0));
    for (const auto & clip : set.clips) {
      const auto p = two_stage_predict(model, clip, data.config.features, data.descriptor);
      ++confusion[static_cast<std::size_t>(*clip.label)][static_cast<std::size_t>(p.label)];
    }
    print_report(out, confusion, data.descriptor.classes);
    return 0;
  }
  const LinearNetModel model = load_model(io::read_file(o.model), o.model);
  const FeatureMatrix x = io::load_features(io::read_file(o.features), o.features);
  const std::vector<int> y = io::parse_labels(io::read_file(o.labels), o.labels);
  if (y.size() != x.rows) {
    throw FormatError(o.labels + ": label count does not match the feature rows");
  }
  const std::size_t C = model.classes;
  std::vector<std::vector<std::size_t>> confusion(C, std::vector<std::size_t>(C, 0));
  for (std::size_t r = 0; r < x.rows; ++r) {
    if (y[r] < 0 || static_cast<std::size_t>(y[r]) >= C) {
      throw InputError(o.labels + ": label " + std::to_string(y[r]) + " outside the model's classes");
    }
    ++confusion[static_cast<std::size_t>(y[r])][predict_class(model, x.row(r))];
  }
  print_report(out, confusion, class_names(o.descriptor, C));
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictOptions
{
  std::string model;
  std::string clip;
  std::string descriptor;
  std::string extract_config;
  std::string scaler;
  std::size_t actors = 1;
  bool two_stage = false;
};

int cmd_predict(const PredictOptions & o, std::ostream & out)
{
  const auto descriptor = io::parse_descriptor(io::read_file(o.descriptor), o.descriptor);
  io::ExtractConfig config;
  if (!o.extract_config.empty()) {
    config = io::parse_extract_config(io::read_file(o.extract_config), o.extract_config);
  }
  const auto clip = prepare_clip(load_clip(o.clip, descriptor), config.centering);
  auto name = [&](int label) {
    const auto c = static_cast<std::size_t>(label);
    return c < descriptor.classes.size() ? descriptor.classes[c] : std::to_string(label);
  };
  if (o.two_stage) {
    const auto model = load_two_stage(io::read_file(o.model), o.model);
    const auto p = two_stage_predict(model, clip, config.features, descriptor);
    out << name(p.label) << " " << fmt(p.probability) << "\n";
    return 0;
  }
  if (o.scaler.empty()) {
    throw InputError("--scaler is required unless --two-stage is given");
  }
  if (clip.detected_actors() == 0) {
    throw InputError(o.clip + ": no detected actors");
  }
  const auto model = load_model(io::read_file(o.model), o.model);
  const auto scaler = io::load_scaler(io::read_file(o.scaler), o.scaler);
  auto x = body_features(clip, o.actors, config.features, descriptor);
  apply_scaler(scaler, x);
  const auto p = forward(model, x);
  const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  out << name(static_cast<int>(best)) << " " << fmt(p[best]) << "\n";
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchOptions
{
  std::uint64_t dim = 60;
  int level = 4;
  std::size_t points = 100;
  std::size_t repeats = 5;
  std::uint64_t seed = 1;
};

int cmd_bench(const BenchOptions & o, std::ostream & out)
{
  if (o.repeats < 1) {
    throw InputError("--repeats must be at least 1");
  }
  if (o.points < 1 || o.dim < 1 || o.level < 1) {
    throw InputError("--dim, --level and --points must be positive");
  }
  const std::uint64_t count = signature_dimension(o.dim, static_cast<std::uint64_t>(o.level), false);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> step(0.0, 1.0 / std::sqrt(static_cast<double>(o.points)));
  std::vector<double> coords(o.dim * o.points, 0.0);
  for (std::size_t i = o.dim; i < coords.size(); ++i) coords[i] = coords[i - o.dim] + step(rng);
  const DiscretePath path(o.dim, std::move(coords));

  SignatureWorkspace workspace(o.dim, o.level);
  std::vector<double> result(workspace.size());
  std::vector<double> seconds;
  for (std::size_t r = 0; r < o.repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    workspace.compute(path.view(), result);
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  double sum = 0.0;
  for (double s : seconds) sum += s;
  out << "dim " << o.dim << " level " << o.level << " points " << o.points << " repeats "
      << o.repeats << "\n";
  out << "coefficients " << count << "\n";
  out << "seconds min " << fmt(*std::min_element(seconds.begin(), seconds.end())) << " mean "
      << fmt(sum / static_cast<double>(seconds.size())) << " max "
      << fmt(*std::max_element(seconds.begin(), seconds.end())) << "\n";
  return 0;
}
}  // namespace

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Path signature features for skeleton-based action recognition", "psf"};
  app.require_subcommand(1);

  auto * sig = app.add_subcommand("sig", "Path signatures");
  sig->require_subcommand(1);
  SigOptions sig_o;
  auto * sig_compute = sig->add_subcommand("compute", "Print the truncated signature of a path file");
  sig_compute->add_option("path", sig_o.path, "Path file")->required();
  sig_compute->add_option("--level,-n", sig_o.level, "Truncation level")->required();
  sig_compute->add_flag("--add-time", sig_o.add_time, "Append a time coordinate in [0, 1]");
  sig_compute->add_option("--lead-lag", sig_o.lead_lag, "Lead-lag dimension for a 1D path");

  auto * features = app.add_subcommand("features", "Feature extraction");
  features->require_subcommand(1);
  ExtractOptions ex_o;
  auto * extract = features->add_subcommand("extract", "Extract scaled feature matrices");
  extract->add_option("--manifest", ex_o.manifest, "Dataset manifest")->required();
  extract->add_option("--descriptor", ex_o.descriptor, "Dataset descriptor")->required();
  extract->add_option("--config", ex_o.config, "Extraction config (defaults otherwise)");
  extract->add_option("--out", ex_o.out, "Output prefix")->required();
  extract->add_option("--seed", ex_o.seed, "Augmentation seed")->capture_default_str();
  extract->add_option("--actors", ex_o.actors, "Top-ranked actors merged into one body")
    ->capture_default_str();

  TrainOptions tr_o;
  auto * train_cmd = app.add_subcommand("train", "Train a classifier");
  train_cmd->add_option("--features", tr_o.features, "Training feature matrix");
  train_cmd->add_option("--labels", tr_o.labels, "Training labels");
  train_cmd->add_option("--config", tr_o.config, "Training config (defaults otherwise)");
  train_cmd->add_option("--model", tr_o.model, "Output model file")->required();
  train_cmd->add_option("--history", tr_o.history, "Per-epoch history output");
  train_cmd->add_option("--classes", tr_o.classes, "Class count (default: largest label + 1)");
  train_cmd->add_option("--seed", tr_o.seed, "Overrides the config seed");
  train_cmd->add_flag("--two-stage", tr_o.two_stage, "Train the body-count gated composition");
  train_cmd->add_option("--manifest", tr_o.manifest, "Dataset manifest (two-stage)");
  train_cmd->add_option("--descriptor", tr_o.descriptor, "Dataset descriptor (two-stage)");
  train_cmd->add_option("--extract-config", tr_o.extract_config, "Extraction config (two-stage)");

  EvalOptions ev_o;
  auto * eval = app.add_subcommand("eval", "Evaluate a classifier");
  eval->add_option("--model", ev_o.model, "Model file")->required();
  eval->add_option("--features", ev_o.features, "Feature matrix");
  eval->add_option("--labels", ev_o.labels, "Labels");
  eval->add_option("--descriptor", ev_o.descriptor, "Descriptor for class names");
  eval->add_flag("--two-stage", ev_o.two_stage, "Evaluate a two-stage model on the test split");
  eval->add_option("--manifest", ev_o.manifest, "Dataset manifest (two-stage)");
  eval->add_option("--extract-config", ev_o.extract_config, "Extraction config (two-stage)");

  PredictOptions pr_o;
  auto * predict = app.add_subcommand("predict", "Classify one clip");
  predict->add_option("--model", pr_o.model, "Model file")->required();
  predict->add_option("--clip", pr_o.clip, "Clip file")->required();
  predict->add_option("--descriptor", pr_o.descriptor, "Dataset descriptor")->required();
  predict->add_option("--extract-config", pr_o.extract_config, "Extraction config");
  predict->add_option("--scaler", pr_o.scaler, "Scaler written by features extract");
  predict->add_option("--actors", pr_o.actors, "Top-ranked actors merged into one body")
    ->capture_default_str();
  predict->add_flag("--two-stage", pr_o.two_stage, "The model is a two-stage composition");

  BenchOptions be_o;
  auto * bench = app.add_subcommand("bench", "Time path_signature on a random path");
  bench->add_option("--dim", be_o.dim, "Path dimension")->capture_default_str();
  bench->add_option("--level", be_o.level, "Truncation level")->capture_default_str();
  bench->add_option("--points", be_o.points, "Number of points")->capture_default_str();
  bench->add_option("--repeats", be_o.repeats, "Timed repetitions")->capture_default_str();
  bench->add_option("--seed", be_o.seed, "Path seed")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  auto need = [](bool ok, const char * message) {
    if (!ok) throw InputError(message);
  };
  try {
    if (*sig_compute) return cmd_sig(sig_o, out);
    if (*extract) return cmd_extract(ex_o, out);
    if (*train_cmd) {
      if (tr_o.two_stage) {
        need(!tr_o.manifest.empty() && !tr_o.descriptor.empty(),
             "train --two-stage needs --manifest and --descriptor");
      } else {
        need(!tr_o.features.empty() && !tr_o.labels.empty(), "train needs --features and --labels");
      }
      return cmd_train(tr_o, out);
    }
    if (*eval) {
      if (ev_o.two_stage) {
        need(!ev_o.manifest.empty() && !ev_o.descriptor.empty(),
             "eval --two-stage needs --manifest and --descriptor");
      } else {
        need(!ev_o.features.empty() && !ev_o.labels.empty(), "eval needs --features and --labels");
      }
      return cmd_eval(ev_o, out);
    }
    if (*predict) return cmd_predict(pr_o, out);
    if (*bench) return cmd_bench(be_o, out);
  } catch (const FormatError & e) {
    err << "psf: format error: " << e.what() << "\n";
    return 2;
  } catch (const InputError & e) {
    err << "psf: error: " << e.what() << "\n";
    return 1;
  } catch (const std::bad_alloc &) {
    err << "psf: error: out of memory\n";
    return 1;
  }
  return 1;
}
}  // namespace psf::cli
