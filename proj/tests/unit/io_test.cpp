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

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "psf/error.hpp"
#include "psf/io.hpp"
#include "synthetic.hpp"

namespace psf::io
{
namespace
{
template <class E, class F>
std::string message_of(F && f)
{
  try {
    f();
  } catch (const E & e) {
    return e.what();
  }
  ADD_FAILURE() << "no exception";
  return {};
}

TEST(Path, ParsesRowsSkippingComments)
{
  const auto p = parse_path("# header\n0, 0\n\n1.5,-2\n", "p.txt");
  EXPECT_EQ(p.dim(), 2u);
  ASSERT_EQ(p.length(), 2u);
  EXPECT_DOUBLE_EQ(p.point(1)[0], 1.5);
  EXPECT_DOUBLE_EQ(p.point(1)[1], -2.0);
}

TEST(Path, RaggedRowNamesLine)
{
  const auto m = message_of<FormatError>([] { parse_path("0,0\n1,2,3\n", "p.txt"); });
  EXPECT_NE(m.find("p.txt:2"), std::string::npos) << m;
  EXPECT_THROW(parse_path("0,abc\n", "p.txt"), FormatError);
  EXPECT_THROW(parse_path("", "p.txt"), FormatError);
}

TEST(Clip, RoundTrip)
{
  std::mt19937_64 rng(3);
  auto clip = testing::random_clip(rng, 5, 2, 4, 3);
  clip.valid[clip.slot(2, 1, 3)] = 0;
  clip.valid[clip.slot(0, 0, 0)] = 0;
  for (std::size_t s = 0; s < clip.valid.size(); ++s) {
    if (!clip.valid[s]) std::fill_n(clip.coords.begin() + s * 3, 3, 0.0);
  }
  clip.id = "c";
  clip.label.reset();
  const auto back = parse_clip(format_clip(clip), "c", 4, 3);
  EXPECT_EQ(back, clip);
}

TEST(Clip, MissingRowsAreInvalid)
{
  const auto c = parse_clip("0,0,0,1,2\n2,1,1,3,4\n", "c", 2, 2);
  EXPECT_EQ(c.frames, 3u);
  EXPECT_EQ(c.actors, 2u);
  EXPECT_TRUE(c.is_valid(0, 0, 0));
  EXPECT_FALSE(c.is_valid(0, 0, 1));
  EXPECT_TRUE(c.is_valid(2, 1, 1));
  EXPECT_DOUBLE_EQ(c.joint(2, 1, 1)[1], 4.0);
}

TEST(Clip, MalformedRowNamesFileAndLine)
{
  auto m = message_of<FormatError>([] { parse_clip("0,0,0,1,2\n0,0,1,1\n", "walk.csv", 2, 2); });
  EXPECT_NE(m.find("walk.csv:2"), std::string::npos) << m;
  m = message_of<FormatError>([] { parse_clip("0,0,1,1,2\n0,0,0,1,2\n", "walk.csv", 2, 2); });
  EXPECT_NE(m.find("walk.csv:2"), std::string::npos) << m;
  m = message_of<FormatError>([] { parse_clip("0,0,0,1,2\n0,0,5,1,2\n", "walk.csv", 2, 2); });
  EXPECT_NE(m.find("walk.csv:2"), std::string::npos) << m;
  EXPECT_THROW(parse_clip("0,-1,0,1,2\n", "walk.csv", 2, 2), FormatError);
  EXPECT_THROW(parse_clip("0,0,0,1,nan\n", "walk.csv", 2, 2), FormatError);
}

TEST(Descriptor, RoundTripAndDefaults)
{
  auto d = testing::synthetic_descriptor();
  d.horizontal_axis = 1;
  const auto back = parse_descriptor(format_descriptor(d), "d");
  EXPECT_EQ(back.joints, d.joints);
  EXPECT_EQ(back.dims, d.dims);
  EXPECT_EQ(back.priority, d.priority);
  EXPECT_EQ(back.mirror, d.mirror);
  EXPECT_EQ(back.horizontal_axis, 1u);
  EXPECT_EQ(back.classes, d.classes);

  const auto s = parse_descriptor("joints = 3\ndims = 2\n", "d");
  EXPECT_EQ(s.priority, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(s.mirror, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Descriptor, Errors)
{
  EXPECT_THROW(parse_descriptor("joints = 3\n", "d"), FormatError);
  EXPECT_THROW(parse_descriptor("joints = 3\ndims = 2\npriority = 0, 0, 1\n", "d"), FormatError);
  EXPECT_THROW(parse_descriptor("joints = 3\ndims = 2\nshape = round\n", "d"), FormatError);
}

TEST(ExtractConfigFile, RoundTrip)
{
  ExtractConfig c;
  c.features.samples = 7;
  c.features.dpsf = true;
  c.features.use_triples = false;
  c.augment.noise_copies = 0;
  c.augment.noise_sigma = 0.25;
  c.centering = Centering::frame;
  const auto back = parse_extract_config(format_extract_config(c), "x");
  EXPECT_EQ(format_extract_config(back), format_extract_config(c));
  EXPECT_EQ(back.features.samples, 7u);
  EXPECT_TRUE(back.features.dpsf);
  EXPECT_EQ(back.centering, Centering::frame);
  EXPECT_THROW(parse_extract_config("samples = 0\n", "x"), FormatError);
  EXPECT_THROW(parse_extract_config("centering = body\n", "x"), FormatError);
}

TEST(Manifest, ParsesAndResolves)
{
  const auto r = parse_manifest(
    "# clips\na.csv, wave, train, 1\n/abs/b.csv,kick,test,2\n", "m.txt", "/data");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].clip, std::filesystem::path("/data/a.csv"));
  EXPECT_EQ(r[0].label, "wave");
  EXPECT_EQ(r[0].split, Split::train);
  EXPECT_EQ(r[0].line, 2u);
  EXPECT_EQ(r[1].clip, std::filesystem::path("/abs/b.csv"));
  EXPECT_EQ(r[1].split, Split::test);
  EXPECT_EQ(r[1].actors, 2u);

  DatasetDescriptor d = DatasetDescriptor::simple(2, 2);
  d.classes = {"wave"};
  EXPECT_EQ(class_index(d, r[0], "m.txt"), 0);
  const auto m = message_of<FormatError>([&] { class_index(d, r[1], "m.txt"); });
  EXPECT_NE(m.find("m.txt:3"), std::string::npos) << m;
}

TEST(Manifest, Errors)
{
  EXPECT_THROW(parse_manifest("a.csv, wave, valid, 1\n", "m", "."), FormatError);
  EXPECT_THROW(parse_manifest("a.csv, wave, train\n", "m", "."), FormatError);
  EXPECT_THROW(parse_manifest("a.csv, wave, train, x\n", "m", "."), FormatError);
}

TEST(Features, RoundTripWithLayout)
{
  FeatureConfig c;
  c.samples = 2;
  FeatureMatrix m;
  m.layout = feature_layout(3, 2, c);
  m.cols = m.layout.total;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (std::size_t r = 0; r < 3; ++r) {
    std::vector<double> row(m.cols);
    for (auto & v : row) v = g(rng);
    m.append(row);
  }
  const auto back = load_features(save_features(m), "f");
  EXPECT_EQ(back.rows, 3u);
  EXPECT_EQ(back.cols, m.cols);
  EXPECT_EQ(back.data, m.data);
  EXPECT_EQ(back.layout, m.layout);
}

TEST(Features, CorruptInput)
{
  FeatureMatrix m;
  m.cols = 2;
  m.append(std::vector<double>{1.0, 2.0});
  const auto bytes = save_features(m);
  EXPECT_EQ(load_features(bytes, "f").data, m.data);
  EXPECT_THROW(load_features(bytes.substr(0, bytes.size() - 3), "f"), FormatError);
  EXPECT_THROW(load_features("SIGFEAT2" + bytes.substr(8), "f"), FormatError);
  EXPECT_THROW(load_features("", "f"), FormatError);
}

TEST(Scaler, RoundTripAndValidation)
{
  FeatureScaler s{{1.0, 0.5, 3.0}};
  const auto back = load_scaler(save_scaler(s, FeatureLayout{}), "s");
  EXPECT_EQ(back.scale, s.scale);
  FeatureScaler bad{{1.0, 0.0}};
  EXPECT_THROW(load_scaler(save_scaler(bad, FeatureLayout{}), "s"), FormatError);
}

TEST(Labels, RoundTrip)
{
  const std::vector<int> y{0, 3, 1, 1};
  EXPECT_EQ(parse_labels(format_labels(y), "l"), y);
  EXPECT_THROW(parse_labels("0\nx\n", "l"), FormatError);
  EXPECT_THROW(parse_labels("-1\n", "l"), FormatError);
}

TEST(Files, MissingFileIsInputError)
{
  EXPECT_THROW(read_file("/nonexistent/psf/file"), InputError);
}
}  // namespace
}  // namespace psf::io
