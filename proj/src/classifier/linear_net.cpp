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
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "psf/binary.hpp"
#include "psf/classifier.hpp"
#include "psf/dropconnect.hpp"
#include "psf/error.hpp"
#include "psf/keyvalue.hpp"

namespace psf
{
namespace
{
constexpr char kModelMagic[] = "SIGNET1";
constexpr std::uint8_t kModelVersion = 1;

std::uint64_t bounded(std::mt19937_64 & rng, std::uint64_t n)
{
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r = 0;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

void softmax_in_place(std::span<double> z)
{
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto & v : z) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (auto & v : z) {
    v /= sum;
  }
}

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t classes)
{
  if (labels.size() != rows) {
    throw InputError(
      "got " + std::to_string(labels.size()) + " labels for " + std::to_string(rows) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw InputError("label " + std::to_string(y) + " outside 0.." + std::to_string(classes - 1));
    }
  }
}

// Hidden pre-activations for one sample with every weight kept and no scaling.
std::vector<double> hidden_unmasked(const LinearNetModel & m, std::span<const double> x)
{
  std::vector<double> h(m.b1);
  for (std::size_t i = 0; i < m.inputs; ++i) {
    const double xi = x[i];
    if (xi == 0.0) {
      continue;
    }
    const double * row = m.w1.data() + i * m.hidden;
    for (std::size_t j = 0; j < m.hidden; ++j) {
      h[j] += xi * row[j];
    }
  }
  return h;
}

std::vector<double> logits(const LinearNetModel & m, std::span<const double> h)
{
  std::vector<double> z(m.b2);
  for (std::size_t j = 0; j < m.hidden; ++j) {
    const double * row = m.w2.data() + j * m.classes;
    for (std::size_t c = 0; c < m.classes; ++c) {
      z[c] += h[j] * row[c];
    }
  }
  return z;
}

// h += w x over one padded batch lane block (n is a multiple of 4).
// n is a multiple of 8.
void axpy(double * __restrict h, const double * __restrict x, double w, std::size_t n)
{
  for (std::size_t b = 0; b < n; b += 8) {
    for (std::size_t l = 0; l < 8; ++l) h[b + l] += w * x[b + l];
  }
}

double dot(const double * __restrict x, const double * __restrict d, std::size_t n)
{
  double a[8] = {};
  for (std::size_t b = 0; b < n; b += 8) {
    for (std::size_t l = 0; l < 8; ++l) a[l] += x[b + l] * d[b + l];
  }
  return ((a[0] + a[4]) + (a[1] + a[5])) + ((a[2] + a[6]) + (a[3] + a[7]));
}

double sample_loss(const LinearNetModel & m, std::span<const double> x, int label)
{
  auto z = logits(m, hidden_unmasked(m, x));
  softmax_in_place(z);
  return -std::log(z[static_cast<std::size_t>(label)]);
}
}  // namespace

void TrainConfig::validate() const
{
  if (batch_size < 1) throw InputError("train config: batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("train config: momentum must be in [0, 1)");
  if (!(learning_rate > 0.0)) throw InputError("train config: learning_rate must be > 0");
  if (!(decay >= 0.0)) throw InputError("train config: decay must be >= 0");
  if (!(dropconnect >= 0.0 && dropconnect < 1.0)) {
    throw InputError("train config: dropconnect must be in [0, 1)");
  }
  if (hidden < 1) throw InputError("train config: hidden must be >= 1");
}

std::string TrainConfig::to_text() const
{
  std::string s;
  s += "batch_size = " + std::to_string(batch_size) + "\n";
  s += "momentum = " + format_double(momentum) + "\n";
  s += "learning_rate = " + format_double(learning_rate) + "\n";
  s += "decay = " + format_double(decay) + "\n";
  s += "max_epochs = " + std::to_string(max_epochs) + "\n";
  s += "dropconnect = " + format_double(dropconnect) + "\n";
  s += "hidden = " + std::to_string(hidden) + "\n";
  s += "seed = " + std::to_string(seed) + "\n";
  return s;
}

TrainConfig TrainConfig::from_text(const std::string & text)
{
  const std::string src = "train config";
  TrainConfig c;
  for (const auto & e : kv::parse(text, src)) {
    if (e.key == "batch_size") c.batch_size = kv::to_u64(e, src);
    else if (e.key == "momentum") c.momentum = kv::to_double(e, src);
    else if (e.key == "learning_rate") c.learning_rate = kv::to_double(e, src);
    else if (e.key == "decay") c.decay = kv::to_double(e, src);
    else if (e.key == "max_epochs") c.max_epochs = kv::to_u64(e, src);
    else if (e.key == "dropconnect") c.dropconnect = kv::to_double(e, src);
    else if (e.key == "hidden") c.hidden = kv::to_u64(e, src);
    else if (e.key == "seed") c.seed = kv::to_u64(e, src);
    else throw FormatError(src + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
  }
  c.validate();
  return c;
}

LinearNetModel LinearNetModel::zeros(std::size_t inputs, std::size_t hidden, std::size_t classes)
{
  LinearNetModel m;
  m.inputs = inputs;
  m.hidden = hidden;
  m.classes = classes;
  m.w1.assign(inputs * hidden, 0.0);
  m.b1.assign(hidden, 0.0);
  m.w2.assign(hidden * classes, 0.0);
  m.b2.assign(classes, 0.0);
  m.config.hidden = hidden;
  return m;
}

LinearNetModel LinearNetModel::initialize(
  std::size_t inputs, std::size_t classes, const TrainConfig & config)
{
  config.validate();
  if (inputs < 1 || classes < 1) {
    throw InputError("model needs at least one input and one class");
  }
  LinearNetModel m = zeros(inputs, config.hidden, classes);
  m.config = config;
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const double fan_in = std::max(1.0, (1.0 - config.dropconnect) * static_cast<double>(inputs));
  const double a1 = std::sqrt(6.0 / (fan_in + static_cast<double>(config.hidden)));
  const double a2 = std::sqrt(6.0 / static_cast<double>(config.hidden + classes));
  for (auto & w : m.w1) w = a1 * (2.0 * GapSampler::unit(rng) - 1.0);
  for (auto & w : m.w2) w = a2 * (2.0 * GapSampler::unit(rng) - 1.0);
  return m;
}

void LinearNetModel::validate() const
{
  if (inputs < 1 || hidden < 1 || classes < 1) {
    throw InputError("model shapes must be positive");
  }
  if (w1.size() != inputs * hidden || b1.size() != hidden || w2.size() != hidden * classes ||
      b2.size() != classes) {
    throw InputError("model weight buffers do not match its shapes");
  }
  for (const auto * buf : {&w1, &b1, &w2, &b2}) {
    for (double v : *buf) {
      if (!std::isfinite(v)) {
        throw InputError("model contains a non-finite weight");
      }
    }
  }
}

std::vector<double> forward(
  const LinearNetModel & model, std::span<const double> x, std::span<const std::uint8_t> mask)
{
  if (x.size() != model.inputs) {
    throw InputError(
      "input has " + std::to_string(x.size()) + " features, model expects " +
      std::to_string(model.inputs));
  }
  std::vector<double> h(model.hidden, 0.0);
  if (!mask.empty()) {
    if (mask.size() != model.w1.size()) {
      throw InputError("dropconnect mask must cover every input-to-hidden weight");
    }
    for (std::size_t i = 0; i < model.inputs; ++i) {
      const double * row = model.w1.data() + i * model.hidden;
      const std::uint8_t * keep = mask.data() + i * model.hidden;
      for (std::size_t j = 0; j < model.hidden; ++j) {
        if (keep[j]) h[j] += x[i] * row[j];
      }
    }
    for (std::size_t j = 0; j < model.hidden; ++j) h[j] += model.b1[j];
  } else {
    for (std::size_t i = 0; i < model.inputs; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double * row = model.w1.data() + i * model.hidden;
      for (std::size_t j = 0; j < model.hidden; ++j) h[j] += xi * row[j];
    }
    const double keep = 1.0 - model.config.dropconnect;
    for (std::size_t j = 0; j < model.hidden; ++j) h[j] = keep * h[j] + model.b1[j];
  }
  auto z = logits(model, h);
  softmax_in_place(z);
  return z;
}

std::size_t predict_class(const LinearNetModel & model, std::span<const double> x)
{
  auto p = forward(model, x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double lr_schedule(std::size_t epoch, const TrainConfig & config)
{
  return config.learning_rate * std::exp(-config.decay * static_cast<double>(epoch));
}

Gradients loss_gradients(
  const LinearNetModel & model, const FeatureMatrix & features, std::span<const int> labels)
{
  if (features.cols != model.inputs) {
    throw InputError("feature width does not match the model");
  }
  check_labels(labels, features.rows, model.classes);
  if (features.rows == 0) {
    throw InputError("loss_gradients needs at least one row");
  }
  const std::size_t H = model.hidden, C = model.classes;
  Gradients g;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(H, 0.0);
  g.w2.assign(model.w2.size(), 0.0);
  g.b2.assign(C, 0.0);
  const double inv = 1.0 / static_cast<double>(features.rows);
  std::vector<double> dh(H);
  for (std::size_t r = 0; r < features.rows; ++r) {
    auto x = features.row(r);
    auto h = hidden_unmasked(model, x);
    auto p = logits(model, h);
    softmax_in_place(p);
    const auto y = static_cast<std::size_t>(labels[r]);
    g.loss -= std::log(p[y]) * inv;
    p[y] -= 1.0;
    for (auto & v : p) v *= inv;
    for (std::size_t c = 0; c < C; ++c) g.b2[c] += p[c];
    for (std::size_t j = 0; j < H; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        g.w2[j * C + c] += h[j] * p[c];
        acc += model.w2[j * C + c] * p[c];
      }
      dh[j] = acc;
      g.b1[j] += acc;
    }
    for (std::size_t i = 0; i < model.inputs; ++i) {
      if (x[i] == 0.0) continue;
      for (std::size_t j = 0; j < H; ++j) g.w1[i * H + j] += x[i] * dh[j];
    }
  }
  return g;
}

double gradient_check(const LinearNetModel & model, std::span<const double> x, int label)
{
  FeatureMatrix one;
  one.append(x);
  const int labels[] = {label};
  const Gradients g = loss_gradients(model, one, labels);

  LinearNetModel probe = model;
  const double step = 1e-5;
  double worst = 0.0;
  auto check = [&](std::vector<double> & params, const std::vector<double> & analytic) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double saved = params[k];
      params[k] = saved + step;
      const double up = sample_loss(probe, x, label);
      params[k] = saved - step;
      const double down = sample_loss(probe, x, label);
      params[k] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double denom = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-7});
      worst = std::max(worst, std::abs(numeric - analytic[k]) / denom);
    }
  };
  check(probe.w1, g.w1);
  check(probe.b1, g.b1);
  check(probe.w2, g.w2);
  check(probe.b2, g.b2);
  return worst;
}

TrainResult train(
  LinearNetModel model, const FeatureMatrix & features, std::span<const int> labels,
  const TrainConfig & config)
{
  config.validate();
  model.validate();
  if (features.rows == 0) {
    throw InputError("training set is empty");
  }
  if (features.cols != model.inputs) {
    throw InputError(
      "features have " + std::to_string(features.cols) + " columns, model expects " +
      std::to_string(model.inputs));
  }
  if (config.hidden != model.hidden) {
    throw InputError("train config hidden size differs from the model");
  }
  check_labels(labels, features.rows, model.classes);
  model.config = config;

  const std::size_t R = features.rows, D = model.inputs, H = model.hidden, C = model.classes;
  const std::size_t B = std::min(config.batch_size, R);
  const std::size_t batches = (R + B - 1) / B;
  const std::size_t total_steps = batches * config.max_epochs;
  const std::uint64_t total = static_cast<std::uint64_t>(D) * H;
  const double mu = config.momentum;
  const GapSampler gaps(config.dropconnect);
  if (total_steps >= std::numeric_limits<std::uint32_t>::max()) {
    throw InputError("too many optimisation steps");
  }

  std::mt19937_64 rng(config.seed);

  // w1 with its momentum and the step it was last brought up to date. An
  // entry outside a batch's mask only coasts on its momentum, so k idle steps
  // are applied at once when it is next kept:
  //   w += v (mu + ... + mu^k),  v *= mu^k.
  struct Slot
  {
    double w;
    double v;
    std::uint32_t synced;
  };
  std::vector<Slot> slots(model.w1.size());
  for (std::size_t e = 0; e < slots.size(); ++e) slots[e] = {model.w1[e], 0.0, 0};
  std::vector<double>().swap(model.w1);
  std::vector<double> decay_pow(total_steps + 1), decay_sum(total_steps + 1);
  decay_pow[0] = 1.0;
  decay_sum[0] = 0.0;
  for (std::size_t k = 1; k <= total_steps; ++k) {
    decay_pow[k] = decay_pow[k - 1] * mu;
    decay_sum[k] = decay_sum[k - 1] + decay_pow[k];
  }
  auto catch_up = [&](Slot & s, std::uint32_t step) {
    const std::uint32_t k = step - s.synced;
    if (k != 0) {
      s.w += s.v * decay_sum[k];
      s.v *= decay_pow[k];
      s.synced = step;
    }
  };
  std::vector<double> vb1(H, 0.0), v2(model.w2.size(), 0.0), vb2(C, 0.0);

  std::vector<std::size_t> order(R);
  std::iota(order.begin(), order.end(), 0);
  // Batch inputs are gathered feature-major one tile of rows at a time, with
  // the batch padded to a multiple of eight lanes.
  constexpr std::size_t kTile = 256;
  const std::size_t lanes = (B + 7) / 8 * 8;
  std::vector<const double *> rows(B);
  std::vector<double> tile(kTile * lanes, 0.0);
  std::vector<double> ht(H * lanes, 0.0), dht(H * lanes, 0.0), probs(B * C);
  std::vector<double> gb1(H), gw2(H * C), gb2(C);
  if (total > std::numeric_limits<std::uint32_t>::max()) {
    throw InputError("model too large to train");
  }
  const auto H32 = static_cast<std::uint32_t>(H);
  std::vector<std::uint32_t> kept;  // flat w1 indices, ascending
  std::vector<double> values;  // per kept entry: weight, then gradient
  kept.reserve(
    static_cast<std::size_t>((1.0 - config.dropconnect) * static_cast<double>(total) * 1.2) + 16);

  TrainResult result;
  std::uint32_t step = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    for (std::size_t i = R; i > 1; --i) {
      std::swap(order[i - 1], order[bounded(rng, i)]);
    }
    double loss_sum = 0.0;
    std::size_t correct = 0;

    for (std::size_t start = 0; start < R; start += B, ++step) {
      const std::size_t nb = std::min(B, R - start);
      const std::size_t np = (nb + 7) / 8 * 8;
      for (std::size_t b = 0; b < nb; ++b) rows[b] = features.data.data() + order[start + b] * D;
      std::size_t tile_start = D;
      auto inputs = [&](std::size_t i) -> const double * {
        if (i - tile_start >= kTile) {
          tile_start = i - i % kTile;
          const std::size_t n = std::min(kTile, D - tile_start);
          for (std::size_t r = 0; r < n; ++r) {
            double * dst = tile.data() + r * np;
            for (std::size_t b = 0; b < nb; ++b) dst[b] = rows[b][tile_start + r];
            for (std::size_t b = nb; b < np; ++b) dst[b] = 0.0;
          }
        }
        return tile.data() + (i - tile_start) * np;
      };

      // Draw the mask and run the forward pass in one sweep over w1.
      for (std::size_t j = 0; j < H; ++j) {
        std::fill_n(ht.begin() + static_cast<std::ptrdiff_t>(j * np), np, model.b1[j]);
      }
      kept.clear();
      for (std::uint64_t e = gaps(rng); e < total; e += 1 + gaps(rng)) {
        kept.push_back(static_cast<std::uint32_t>(e));
        if (e == total - 1) break;
      }
      // Slot reads are scattered across a large table; fetch them ahead.
      constexpr std::size_t kAhead = 16;
      auto slot_at = [&](std::size_t k) -> Slot & {
        if (k + kAhead < kept.size()) {
          __builtin_prefetch(&slots[kept[k + kAhead]], 1);
        }
        return slots[kept[k]];
      };
      // Kept in separate sweeps so the scattered slot traffic and the input
      // tiles do not compete.
      values.resize(kept.size());
      for (std::size_t k = 0; k < kept.size(); ++k) {
        Slot & s = slot_at(k);
        catch_up(s, step);
        values[k] = s.w;
      }
      for (std::size_t k = 0; k < kept.size(); ++k) {
        const std::uint32_t i = kept[k] / H32, j = kept[k] - i * H32;
        axpy(ht.data() + std::size_t{j} * np, inputs(i), values[k], np);
      }

      for (std::size_t b = 0; b < nb; ++b) {
        double * z = probs.data() + b * C;
        for (std::size_t c = 0; c < C; ++c) z[c] = model.b2[c];
        for (std::size_t j = 0; j < H; ++j) {
          const double hj = ht[j * np + b];
          const double * w2row = model.w2.data() + j * C;
          for (std::size_t c = 0; c < C; ++c) z[c] += hj * w2row[c];
        }
        softmax_in_place(std::span<double>(z, C));
        const auto y = static_cast<std::size_t>(labels[order[start + b]]);
        loss_sum -= std::log(z[y]);
        if (static_cast<std::size_t>(std::max_element(z, z + C) - z) == y) ++correct;
        z[y] -= 1.0;
        for (std::size_t c = 0; c < C; ++c) z[c] /= static_cast<double>(nb);
      }

      // Backward through the output layer.
      std::fill(gb2.begin(), gb2.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);
      for (std::size_t b = 0; b < nb; ++b) {
        const double * dz = probs.data() + b * C;
        for (std::size_t c = 0; c < C; ++c) gb2[c] += dz[c];
        for (std::size_t j = 0; j < H; ++j) {
          const double hj = ht[j * np + b];
          const double * w2row = model.w2.data() + j * C;
          double acc = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            gw2[j * C + c] += hj * dz[c];
            acc += w2row[c] * dz[c];
          }
          dht[j * np + b] = acc;
        }
      }
      for (std::size_t j = 0; j < H; ++j) {
        double acc = 0.0;
        for (std::size_t b = 0; b < nb; ++b) acc += dht[j * np + b];
        for (std::size_t b = nb; b < np; ++b) dht[j * np + b] = 0.0;
        gb1[j] = acc;
      }

      // Kept w1 entries: gradient and momentum step.
      tile_start = D;
      for (std::size_t k = 0; k < kept.size(); ++k) {
        const std::uint32_t i = kept[k] / H32, j = kept[k] - i * H32;
        values[k] = dot(inputs(i), dht.data() + std::size_t{j} * np, np);
      }
      for (std::size_t k = 0; k < kept.size(); ++k) {
        Slot & s = slot_at(k);
        s.v = mu * s.v - lr * values[k];
        s.w += s.v;
        s.synced = step + 1;
      }
      for (std::size_t k = 0; k < v2.size(); ++k) {
        v2[k] = mu * v2[k] - lr * gw2[k];
        model.w2[k] += v2[k];
      }
      for (std::size_t j = 0; j < H; ++j) {
        vb1[j] = mu * vb1[j] - lr * gb1[j];
        model.b1[j] += vb1[j];
      }
      for (std::size_t c = 0; c < C; ++c) {
        vb2[c] = mu * vb2[c] - lr * gb2[c];
        model.b2[c] += vb2[c];
      }
    }
    result.history.push_back(
      {epoch, lr, loss_sum / static_cast<double>(R),
       static_cast<double>(correct) / static_cast<double>(R)});
  }
  model.w1.resize(slots.size());
  for (std::size_t e = 0; e < slots.size(); ++e) {
    catch_up(slots[e], step);
    model.w1[e] = slots[e].w;
  }
  result.model = std::move(model);
  return result;
}

TrainResult train(
  const FeatureMatrix & features, std::span<const int> labels, std::size_t classes,
  const TrainConfig & config)
{
  return train(LinearNetModel::initialize(features.cols, classes, config), features, labels, config);
}

std::string save_model(const LinearNetModel & model)
{
  model.validate();
  std::string out(kModelMagic, sizeof(kModelMagic) - 1);
  out.push_back(static_cast<char>(kModelVersion));
  binary::put_u64(out, model.inputs);
  binary::put_u64(out, model.hidden);
  binary::put_u64(out, model.classes);
  binary::put_f64s(out, model.w1);
  binary::put_f64s(out, model.b1);
  binary::put_f64s(out, model.w2);
  binary::put_f64s(out, model.b2);
  const std::string config = model.config.to_text();
  binary::put_u64(out, config.size());
  out += config;
  return out;
}

LinearNetModel load_model(const std::string & bytes, const std::string & source)
{
  binary::Reader in(bytes, source);
  if (in.bytes(sizeof(kModelMagic) - 1, "magic") != std::string_view(kModelMagic)) {
    throw FormatError(source + ": not a model file (bad magic)");
  }
  const auto version = in.u8("version");
  if (version != kModelVersion) {
    in.fail("unsupported model version " + std::to_string(version));
  }
  const std::uint64_t D = in.u64("input dimension");
  const std::uint64_t H = in.u64("hidden size");
  const std::uint64_t C = in.u64("class count");
  const std::uint64_t weights = D * H + H + H * C + C;
  if (D == 0 || H == 0 || C == 0 || D > (std::uint64_t{1} << 40) / H ||
      weights > in.remaining() / 8) {
    in.fail(
      "shapes D=" + std::to_string(D) + " H=" + std::to_string(H) + " C=" + std::to_string(C) +
      " do not fit the file");
  }
  LinearNetModel m = LinearNetModel::zeros(D, H, C);
  in.f64s(m.w1, "w1");
  in.f64s(m.b1, "b1");
  in.f64s(m.w2, "w2");
  in.f64s(m.b2, "b2");
  const std::uint64_t len = in.u64("config length");
  const auto text = in.bytes(len, "config text");
  if (in.remaining() != 0) {
    in.fail("trailing bytes after the config block");
  }
  try {
    m.config = TrainConfig::from_text(std::string(text));
  } catch (const InputError & e) {
    throw FormatError(source + ": " + e.what());
  }
  if (m.config.hidden != H) {
    throw FormatError(source + ": config hidden size disagrees with the weights");
  }
  return m;
}
}  // namespace psf
