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

#include "psf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "psf/binary.hpp"
#include "psf/error.hpp"
#include "psf/keyvalue.hpp"

namespace psf::io
{
namespace
{
constexpr char kFeatureMagic[] = "SIGFEAT1";

std::string where(const std::string & source, std::size_t line)
{
  return source + ":" + std::to_string(line) + ": ";
}

std::vector<std::string> split_fields(const std::string & line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(kv::trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) {
      return out;
    }
    start = comma + 1;
  }
}

double parse_double(const std::string & s, const std::string & source, std::size_t line)
{
  double v = 0.0;
  const char * end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty() || !std::isfinite(v)) {
    throw FormatError(where(source, line) + "'" + s + "' is not a finite number");
  }
  return v;
}

std::size_t parse_index(const std::string & s, const std::string & source, std::size_t line)
{
  std::size_t v = 0;
  const char * end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) {
    throw FormatError(where(source, line) + "'" + s + "' is not a non-negative integer");
  }
  return v;
}

// Calls fn(line text, line number) for every line that is not blank or a comment.
template <class Fn>
void for_each_record(const std::string & text, Fn && fn)
{
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = kv::trim(line);
    if (t.empty() || t[0] == '#') {
      continue;
    }
    fn(t, lineno);
  }
}

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::size_t> & values)
{
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += (i ? ", " : "") + std::to_string(values[i]);
  }
  return s;
}

std::vector<std::size_t> index_list(const kv::Entry & e, const std::string & source)
{
  std::vector<std::size_t> out;
  for (const auto & item : kv::split_list(e.value)) {
    out.push_back(parse_index(item, source, e.line));
  }
  return out;
}

int to_level(const kv::Entry & e, const std::string & source)
{
  const auto v = kv::to_u64(e, source);
  if (v > 64) {
    kv::bad_value(e, source, "a level of at most 64");
  }
  return static_cast<int>(v);
}
}  // namespace

std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    throw InputError("error while reading '" + path.string() + "'");
  }
  return ss.str();
}

void write_file(const std::filesystem::path & path, std::string_view bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InputError("cannot write '" + path.string() + "'");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw InputError("error while writing '" + path.string() + "'");
  }
}

DiscretePath parse_path(const std::string & text, const std::string & source)
{
  std::size_t dim = 0;
  std::vector<double> coords;
  for_each_record(text, [&](const std::string & line, std::size_t lineno) {
    const auto fields = split_fields(line);
    if (dim == 0) {
      dim = fields.size();
    } else if (fields.size() != dim) {
      throw FormatError(
        where(source, lineno) + "expected " + std::to_string(dim) + " coordinates, got " +
        std::to_string(fields.size()));
    }
    for (const auto & f : fields) {
      coords.push_back(parse_double(f, source, lineno));
    }
  });
  if (dim == 0) {
    throw FormatError(source + ": no samples");
  }
  return DiscretePath(dim, std::move(coords));
}

SkeletonClip parse_clip(
  const std::string & text, const std::string & source, std::size_t joints, std::size_t dims)
{
  struct Row
  {
    std::size_t frame, actor, joint;
    std::vector<double> coords;
  };
  std::vector<Row> rows;
  std::size_t frames = 0, actors = 0;
  for_each_record(text, [&](const std::string & line, std::size_t lineno) {
    const auto fields = split_fields(line);
    if (fields.size() != 3 + dims) {
      throw FormatError(
        where(source, lineno) + "expected frame, actor, joint and " + std::to_string(dims) +
        " coordinates, got " + std::to_string(fields.size()) + " fields");
    }
    Row r{parse_index(fields[0], source, lineno), parse_index(fields[1], source, lineno),
          parse_index(fields[2], source, lineno), {}};
    if (r.joint >= joints) {
      throw FormatError(
        where(source, lineno) + "joint " + std::to_string(r.joint) + " out of range (N=" +
        std::to_string(joints) + ")");
    }
    if (r.frame > 10'000'000 || r.actor > 1'000) {
      throw FormatError(where(source, lineno) + "frame or actor index implausibly large");
    }
    if (!rows.empty()) {
      const auto & p = rows.back();
      if (std::tie(p.frame, p.actor, p.joint) >= std::tie(r.frame, r.actor, r.joint)) {
        throw FormatError(
          where(source, lineno) + "rows must be sorted by (frame, actor, joint) without repeats");
      }
    }
    for (std::size_t c = 0; c < dims; ++c) {
      r.coords.push_back(parse_double(fields[3 + c], source, lineno));
    }
    frames = std::max(frames, r.frame + 1);
    actors = std::max(actors, r.actor + 1);
    rows.push_back(std::move(r));
  });
  if (rows.empty()) {
    throw FormatError(source + ": clip has no rows");
  }
  auto clip = SkeletonClip::zeros(frames, actors, joints, dims);
  clip.id = source;
  std::fill(clip.valid.begin(), clip.valid.end(), std::uint8_t{0});
  for (const auto & r : rows) {
    std::copy(r.coords.begin(), r.coords.end(), clip.joint(r.frame, r.actor, r.joint).begin());
    clip.valid[clip.slot(r.frame, r.actor, r.joint)] = 1;
  }
  return clip;
}

std::string format_clip(const SkeletonClip & clip)
{
  std::string out;
  for (std::size_t f = 0; f < clip.frames; ++f) {
    for (std::size_t a = 0; a < clip.actors; ++a) {
      for (std::size_t j = 0; j < clip.joints; ++j) {
        if (!clip.is_valid(f, a, j)) continue;
        out += std::to_string(f) + "," + std::to_string(a) + "," + std::to_string(j);
        for (double v : clip.joint(f, a, j)) {
          out += "," + format_double(v);
        }
        out += "\n";
      }
    }
  }
  return out;
}

DatasetDescriptor parse_descriptor(const std::string & text, const std::string & source)
{
  DatasetDescriptor d;
  bool has_priority = false, has_mirror = false;
  for (const auto & e : kv::parse(text, source)) {
    if (e.key == "joints") {
      d.joints = kv::to_u64(e, source);
    } else if (e.key == "dims") {
      d.dims = kv::to_u64(e, source);
    } else if (e.key == "priority") {
      d.priority = index_list(e, source);
      has_priority = true;
    } else if (e.key == "mirror") {
      d.mirror = index_list(e, source);
      has_mirror = true;
    } else if (e.key == "horizontal_axis") {
      d.horizontal_axis = kv::to_u64(e, source);
    } else if (e.key == "classes") {
      d.classes = kv::split_list(e.value);
    } else {
      throw FormatError(where(source, e.line) + "unknown key '" + e.key + "'");
    }
  }
  if (d.joints > 100'000) {
    throw FormatError(source + ": joint count implausibly large");
  }
  const auto identity = DatasetDescriptor::simple(std::max<std::size_t>(d.joints, 2), 2);
  if (!has_priority) d.priority = identity.priority;
  if (!has_mirror) d.mirror = identity.mirror;
  try {
    d.validate();
  } catch (const InputError & e) {
    throw FormatError(source + ": " + e.what());
  }
  return d;
}

std::string format_descriptor(const DatasetDescriptor & d)
{
  std::string s;
  s += "joints = " + std::to_string(d.joints) + "\n";
  s += "dims = " + std::to_string(d.dims) + "\n";
  s += "priority = " + join(d.priority) + "\n";
  s += "mirror = " + join(d.mirror) + "\n";
  s += "horizontal_axis = " + std::to_string(d.horizontal_axis) + "\n";
  s += "classes =";
  for (std::size_t i = 0; i < d.classes.size(); ++i) {
    s += (i ? ", " : " ") + d.classes[i];
  }
  return s + "\n";
}

ExtractConfig parse_extract_config(const std::string & text, const std::string & source)
{
  ExtractConfig c;
  auto & f = c.features;
  for (const auto & e : kv::parse(text, source)) {
    const auto & k = e.key;
    if (k == "samples") f.samples = kv::to_u64(e, source);
    else if (k == "pair_level") f.pair_level = to_level(e, source);
    else if (k == "triple_level") f.triple_level = to_level(e, source);
    else if (k == "joint_level") f.joint_level = to_level(e, source);
    else if (k == "evolution_level") f.evolution_level = to_level(e, source);
    else if (k == "lead_lag_dim") f.lead_lag_dim = to_level(e, source);
    else if (k == "dpsf") f.dpsf = kv::to_bool(e, source);
    else if (k == "dpsf_depth") f.dpsf_depth = to_level(e, source);
    else if (k == "use_joints") f.use_joints = kv::to_bool(e, source);
    else if (k == "use_pairs") f.use_pairs = kv::to_bool(e, source);
    else if (k == "use_triples") f.use_triples = kv::to_bool(e, source);
    else if (k == "use_joint_paths") f.use_joint_paths = kv::to_bool(e, source);
    else if (k == "use_evolutions") f.use_evolutions = kv::to_bool(e, source);
    else if (k == "flip") c.augment.flip = kv::to_bool(e, source);
    else if (k == "noise_copies") c.augment.noise_copies = static_cast<int>(kv::to_u64(e, source));
    else if (k == "noise_sigma") c.augment.noise_sigma = kv::to_double(e, source);
    else if (k == "centering") {
      if (e.value == "clip") c.centering = Centering::clip;
      else if (e.value == "frame") c.centering = Centering::frame;
      else kv::bad_value(e, source, "'clip' or 'frame'");
    } else {
      throw FormatError(where(source, e.line) + "unknown key '" + k + "'");
    }
  }
  try {
    f.validate();
    if (!(c.augment.noise_sigma >= 0.0) || c.augment.noise_copies > 1000) {
      throw InputError("noise_sigma must be >= 0 and noise_copies at most 1000");
    }
  } catch (const InputError & e) {
    throw FormatError(source + ": " + e.what());
  }
  return c;
}

std::string format_extract_config(const ExtractConfig & c)
{
  const auto & f = c.features;
  auto b = [](bool v) { return v ? std::string("true") : std::string("false"); };
  std::string s;
  s += "samples = " + std::to_string(f.samples) + "\n";
  s += "pair_level = " + std::to_string(f.pair_level) + "\n";
  s += "triple_level = " + std::to_string(f.triple_level) + "\n";
  s += "joint_level = " + std::to_string(f.joint_level) + "\n";
  s += "evolution_level = " + std::to_string(f.evolution_level) + "\n";
  s += "lead_lag_dim = " + std::to_string(f.lead_lag_dim) + "\n";
  s += "dpsf = " + b(f.dpsf) + "\n";
  s += "dpsf_depth = " + std::to_string(f.dpsf_depth) + "\n";
  s += "use_joints = " + b(f.use_joints) + "\n";
  s += "use_pairs = " + b(f.use_pairs) + "\n";
  s += "use_triples = " + b(f.use_triples) + "\n";
  s += "use_joint_paths = " + b(f.use_joint_paths) + "\n";
  s += "use_evolutions = " + b(f.use_evolutions) + "\n";
  s += "flip = " + b(c.augment.flip) + "\n";
  s += "noise_copies = " + std::to_string(c.augment.noise_copies) + "\n";
  s += "noise_sigma = " + format_double(c.augment.noise_sigma) + "\n";
  s += std::string("centering = ") + (c.centering == Centering::clip ? "clip" : "frame") + "\n";
  return s;
}

std::vector<ManifestRecord> parse_manifest(
  const std::string & text, const std::string & source, const std::filesystem::path & base)
{
  std::vector<ManifestRecord> out;
  for_each_record(text, [&](const std::string & line, std::size_t lineno) {
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw FormatError(
        where(source, lineno) + "expected 'clip path, label, split, actor count', got " +
        std::to_string(fields.size()) + " fields");
    }
    ManifestRecord r;
    r.line = lineno;
    const std::filesystem::path p(fields[0]);
    r.clip = p.is_absolute() ? p : base / p;
    r.label = fields[1];
    if (fields[2] == "train") {
      r.split = Split::train;
    } else if (fields[2] == "test") {
      r.split = Split::test;
    } else {
      throw FormatError(where(source, lineno) + "split must be 'train' or 'test'");
    }
    r.actors = parse_index(fields[3], source, lineno);
    if (fields[0].empty() || r.label.empty()) {
      throw FormatError(where(source, lineno) + "empty clip path or label");
    }
    out.push_back(std::move(r));
  });
  return out;
}

int class_index(const DatasetDescriptor & descriptor, const ManifestRecord & record,
                const std::string & source)
{
  for (std::size_t c = 0; c < descriptor.classes.size(); ++c) {
    if (descriptor.classes[c] == record.label) {
      return static_cast<int>(c);
    }
  }
  throw FormatError(
    where(source, record.line) + "label '" + record.label + "' is not a declared class");
}

std::string save_features(const FeatureMatrix & matrix)
{
  if (matrix.data.size() != matrix.rows * matrix.cols) {
    throw InputError("feature matrix buffer does not match its shape");
  }
  std::string out(kFeatureMagic, sizeof(kFeatureMagic) - 1);
  binary::put_u64(out, matrix.rows);
  binary::put_u64(out, matrix.cols);
  binary::put_f64s(out, matrix.data);
  if (matrix.layout.total != 0) {
    out += matrix.layout.to_text();
  }
  return out;
}

FeatureMatrix load_features(const std::string & bytes, const std::string & source)
{
  binary::Reader in(bytes, source);
  if (in.bytes(sizeof(kFeatureMagic) - 1, "magic") != std::string_view(kFeatureMagic)) {
    throw FormatError(source + ": not a feature file (bad magic)");
  }
  FeatureMatrix m;
  m.rows = in.u64("row count");
  m.cols = in.u64("column count");
  if (m.cols != 0 && m.rows > in.remaining() / 8 / m.cols) {
    in.fail(
      "a " + std::to_string(m.rows) + " x " + std::to_string(m.cols) +
      " matrix does not fit in the file");
  }
  m.data.resize(m.rows * m.cols);
  in.f64s(m.data, "values");
  const auto footer = in.bytes(in.remaining(), "layout");
  if (!footer.empty()) {
    try {
      m.layout = FeatureLayout::from_text(std::string(footer));
    } catch (const FormatError & e) {
      throw FormatError(source + ": " + e.what());
    }
    if (m.layout.total != m.cols) {
      throw FormatError(source + ": layout width does not match the column count");
    }
  }
  return m;
}

std::string save_scaler(const FeatureScaler & scaler, const FeatureLayout & layout)
{
  FeatureMatrix m;
  m.append(scaler.scale);
  if (layout.total == scaler.scale.size()) {
    m.layout = layout;
  }
  return save_features(m);
}

FeatureScaler load_scaler(const std::string & bytes, const std::string & source)
{
  auto m = load_features(bytes, source);
  if (m.rows != 1) {
    throw FormatError(source + ": a scaler file holds exactly one row");
  }
  for (double s : m.data) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw FormatError(source + ": scale factors must be positive and finite");
    }
  }
  return {std::move(m.data)};
}

std::string format_labels(std::span<const int> labels)
{
  std::string s;
  for (int y : labels) {
    s += std::to_string(y) + "\n";
  }
  return s;
}

std::vector<int> parse_labels(const std::string & text, const std::string & source)
{
  std::vector<int> out;
  for_each_record(text, [&](const std::string & line, std::size_t lineno) {
    const auto v = parse_index(line, source, lineno);
    if (v > 1'000'000) {
      throw FormatError(where(source, lineno) + "label implausibly large");
    }
    out.push_back(static_cast<int>(v));
  });
  return out;
}
}  // namespace psf::io
