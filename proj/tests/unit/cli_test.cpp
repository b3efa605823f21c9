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
#include <regex>
#include <sstream>

#include "psf/classifier.hpp"
#include "psf/io.hpp"
#include "psf_cli.hpp"
#include "synthetic.hpp"

namespace psf::cli
{
namespace
{
namespace fs = std::filesystem;

struct Result
{
  int code = -1;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args)
{
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir
{
public:
  TempDir()
  {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("psf_cli_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string & name) const { return (path_ / name).string(); }
  const fs::path & path() const { return path_; }

private:
  fs::path path_;
};

void write(const std::string & path, const std::string & text) { io::write_file(path, text); }

// Small synthetic dataset on disk: clips, manifest, descriptor and a light
// extraction config.
struct Dataset
{
  std::string manifest, descriptor, config, train_config;
};

Dataset make_dataset(const TempDir & dir, std::size_t train = 24, std::size_t test = 12)
{
  Dataset d;
  const auto desc = testing::synthetic_descriptor();
  const auto clips = testing::synthetic_actions({}, train + test, 9);
  std::string manifest;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const std::string name = "clip" + std::to_string(i) + ".csv";
    write(dir / name, io::format_clip(clips[i]));
    manifest += name + ", " + desc.classes[static_cast<std::size_t>(*clips[i].label)] + ", " +
                (i < train ? "train" : "test") + ", 1\n";
  }
  d.manifest = dir / "manifest.txt";
  write(d.manifest, manifest);
  d.descriptor = dir / "descriptor.txt";
  write(d.descriptor, io::format_descriptor(desc));
  d.config = dir / "extract.cfg";
  write(d.config,
        "samples = 3\nuse_triples = false\nuse_evolutions = false\njoint_level = 3\n"
        "noise_copies = 1\n");
  d.train_config = dir / "train.cfg";
  write(d.train_config, "max_epochs = 30\nbatch_size = 10\nlearning_rate = 0.05\n");
  return d;
}

std::vector<double> numbers_after(const std::string & text, const std::string & tag)
{
  std::vector<double> v;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(tag, 0) != 0) continue;
    std::istringstream ls(line.substr(tag.size()));
    double x;
    while (ls >> x) v.push_back(x);
  }
  return v;
}

TEST(SigCompute, OneDimensionalLevelThree)
{
  TempDir dir;
  write(dir / "p.txt", "0\n2\n");
  const auto r = call({"sig", "compute", dir / "p.txt", "--level", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(numbers_after(r.out, "level 1:"), std::vector<double>{2.0});
  EXPECT_EQ(numbers_after(r.out, "level 2:"), std::vector<double>{2.0});
  EXPECT_NE(r.out.find("level 3: 1.3333333333333333\n"), std::string::npos) << r.out;
}

TEST(SigCompute, TwoDimensionalSegment)
{
  TempDir dir;
  write(dir / "p.txt", "0, 0\n1, 2\n");
  const auto r = call({"sig", "compute", dir / "p.txt", "--level", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(numbers_after(r.out, "level 1:"), (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(numbers_after(r.out, "level 2:"), (std::vector<double>{0.5, 1.0, 1.0, 2.0}));
}

TEST(SigCompute, TransformsAndErrors)
{
  TempDir dir;
  write(dir / "p1.txt", "1\n3\n2\n");
  write(dir / "p2.txt", "0, 0\n1, 2\n");
  write(dir / "bad.txt", "0, 0\n1\n");

  auto r = call({"sig", "compute", dir / "p1.txt", "--level", "1", "--lead-lag", "2", "--add-time"});
  ASSERT_EQ(r.code, 0) << r.err;
  // Two-dimensional lead-lag of (1, 3, 2) runs from (1, 0) to (2, 3); time spans [0, 1].
  EXPECT_EQ(numbers_after(r.out, "level 1:"), (std::vector<double>{1.0, 3.0, 1.0}));

  r = call({"sig", "compute", dir / "p2.txt", "--level", "2", "--lead-lag", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
  r = call({"sig", "compute", dir / "bad.txt", "--level", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.txt:2"), std::string::npos) << r.err;
  EXPECT_EQ(call({"sig", "compute", dir / "missing.txt", "--level", "2"}).code, 1);
  EXPECT_EQ(call({"sig", "compute", dir / "p2.txt"}).code, 1);
  EXPECT_EQ(call({"sig", "compute", dir / "p2.txt", "--level", "0"}).code, 1);
  EXPECT_EQ(call({"frobnicate"}).code, 1);
  EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Bench, ReportsCoefficientCount)
{
  auto r = call({"bench", "--dim", "2", "--level", "2", "--points", "10", "--repeats", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("coefficients 6\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("seconds min "), std::string::npos);

  r = call({"bench", "--dim", "60", "--level", "2", "--points", "10", "--repeats", "1"});
  EXPECT_NE(r.out.find("coefficients 3660\n"), std::string::npos) << r.out;

  EXPECT_EQ(call({"bench", "--dim", "2", "--level", "2", "--repeats", "0"}).code, 1);
}

TEST(Extract, MalformedClipNamesFileAndLine)
{
  TempDir dir;
  const auto d = make_dataset(dir, 4, 0);
  write(dir / "clip2.csv", "0,0,0,0.1,0.2\n0,0,1,0.3\n");
  const auto r = call({"features", "extract", "--manifest", d.manifest, "--descriptor", d.descriptor,
                       "--config", d.config, "--out", dir / "f"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("clip2.csv:2"), std::string::npos) << r.err;
}

TEST(Extract, UndeclaredLabelIsFormatError)
{
  TempDir dir;
  const auto d = make_dataset(dir, 4, 0);
  write(d.manifest, "clip0.csv, moonwalk, train, 1\n");
  const auto r = call({"features", "extract", "--manifest", d.manifest, "--descriptor", d.descriptor,
                       "--out", dir / "f"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("manifest.txt:1"), std::string::npos) << r.err;
}

TEST(Extract, DeterministicAndLayoutSummary)
{
  TempDir dir;
  const auto d = make_dataset(dir, 8, 4);
  const std::vector<std::string> base{"features", "extract", "--manifest", d.manifest,
                                      "--descriptor", d.descriptor, "--config", d.config,
                                      "--seed", "7", "--out"};
  auto args = base;
  args.push_back(dir / "a");
  const auto r = call(args);
  ASSERT_EQ(r.code, 0) << r.err;
  args.back() = dir / "b";
  ASSERT_EQ(call(args).code, 0);
  for (const char * suffix : {".train.sigfeat", ".test.sigfeat", ".train.labels", ".test.labels",
                              ".scaler.sigfeat"}) {
    EXPECT_EQ(io::read_file(dir / (std::string("a") + suffix)),
              io::read_file(dir / (std::string("b") + suffix)))
      << suffix;
  }
  for (const char * key : {"D_SJ", "D_SP", "D_ST", "D_S ", "D_TJ", "D_TS", "D_T ", "D    "}) {
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
  }
  // One flip and one noisy copy per training clip.
  EXPECT_NE(r.out.find("train rows 24, test rows 4"), std::string::npos) << r.out;

  const auto train = io::load_features(io::read_file(dir / "a.train.sigfeat"), "t");
  FeatureConfig fc;
  fc.samples = 3;
  fc.use_triples = false;
  fc.use_evolutions = false;
  fc.joint_level = 3;
  EXPECT_EQ(train.layout, feature_layout(15, 2, fc));
  EXPECT_NE(r.out.find("D    = " + std::to_string(train.cols) + "\n"), std::string::npos);
  for (double v : train.data) {
    ASSERT_LE(std::abs(v), 1.0 + 1e-12);
  }

  args = base;
  args[9] = "8";
  args.push_back(dir / "c");
  ASSERT_EQ(call(args).code, 0);
  EXPECT_NE(io::read_file(dir / "a.train.sigfeat"), io::read_file(dir / "c.train.sigfeat"));
}

TEST(Pipeline, TrainEvalPredict)
{
  TempDir dir;
  const auto d = make_dataset(dir);
  ASSERT_EQ(call({"features", "extract", "--manifest", d.manifest, "--descriptor", d.descriptor,
                  "--config", d.config, "--out", dir / "f"})
              .code,
            0);
  auto r = call({"train", "--features", dir / "f.train.sigfeat", "--labels", dir / "f.train.labels",
                 "--config", d.train_config, "--classes", "4", "--model", dir / "m.bin",
                 "--history", dir / "h.txt"});
  ASSERT_EQ(r.code, 0) << r.err;

  const auto history = io::read_file(dir / "h.txt");
  std::istringstream hs(history);
  std::string line;
  std::getline(hs, line);
  EXPECT_EQ(line, "epoch\tlr\tloss\taccuracy");
  std::size_t epochs = 0;
  while (std::getline(hs, line)) {
    ++epochs;
    std::istringstream ls(line);
    double epoch, lr, loss, acc;
    ASSERT_TRUE(ls >> epoch >> lr >> loss >> acc) << line;
    EXPECT_NEAR(lr, 0.05 * std::exp(-0.005 * epoch), 1e-15);
  }
  EXPECT_EQ(epochs, 30u);

  // A second run reproduces the model byte for byte.
  ASSERT_EQ(call({"train", "--features", dir / "f.train.sigfeat", "--labels",
                  dir / "f.train.labels", "--config", d.train_config, "--classes", "4", "--model",
                  dir / "m2.bin"})
              .code,
            0);
  EXPECT_EQ(io::read_file(dir / "m.bin"), io::read_file(dir / "m2.bin"));

  r = call({"eval", "--model", dir / "m.bin", "--features", dir / "f.test.sigfeat", "--labels",
            dir / "f.test.labels", "--descriptor", d.descriptor});
  ASSERT_EQ(r.code, 0) << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex(R"(accuracy (\S+) \((\d+)/(\d+)\))")));
  const double printed = std::stod(m[1]);

  // Confusion matrix rows follow the header line.
  const auto at = r.out.find("confusion matrix");
  ASSERT_NE(at, std::string::npos);
  std::istringstream cs(r.out.substr(r.out.find('\n', at) + 1));
  std::size_t trace = 0, total = 0;
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t p = 0; p < 4; ++p) {
      std::size_t n;
      ASSERT_TRUE(cs >> n);
      total += n;
      if (t == p) trace += n;
    }
    std::string name;
    cs >> name;
  }
  EXPECT_EQ(total, 12u);
  EXPECT_EQ(printed, static_cast<double>(trace) / static_cast<double>(total));
  EXPECT_EQ(std::to_string(trace), m[2].str());
  EXPECT_GE(printed, 0.75) << r.out;

  r = call({"predict", "--model", dir / "m.bin", "--clip", dir / "clip30.csv", "--descriptor",
            d.descriptor, "--extract-config", d.config, "--scaler", dir / "f.scaler.sigfeat"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(std::regex_match(r.out, m, std::regex(R"((\S+) (\S+)\n)"))) << r.out;
  const auto desc = io::parse_descriptor(io::read_file(d.descriptor), "d");
  EXPECT_NE(std::find(desc.classes.begin(), desc.classes.end(), m[1].str()), desc.classes.end());
  const double p = std::stod(m[2]);
  EXPECT_GE(p, 0.25);
  EXPECT_LE(p, 1.0);

  // Model file with a corrupted header is a format error.
  auto bytes = io::read_file(dir / "m.bin");
  bytes[0] = 'X';
  write(dir / "bad.bin", bytes);
  r = call({"eval", "--model", dir / "bad.bin", "--features", dir / "f.test.sigfeat", "--labels",
            dir / "f.test.labels"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(call({"eval", "--model", dir / "m.bin", "--features", dir / "f.test.sigfeat"}).code, 1);
}

TEST(Pipeline, TwoStage)
{
  TempDir dir;
  const auto d = make_dataset(dir, 16, 8);
  // Declare the last class as a two-person action.
  auto manifest = io::read_file(d.manifest);
  manifest = std::regex_replace(manifest, std::regex(R"((, clap, \w+, )1)"), "$012");
  write(d.manifest, manifest);

  auto r = call({"train", "--two-stage", "--manifest", d.manifest, "--descriptor", d.descriptor,
                 "--extract-config", d.config, "--config", d.train_config, "--model",
                 dir / "two.bin"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("stages: gate one-body multi-body"), std::string::npos) << r.out;

  r = call({"eval", "--two-stage", "--model", dir / "two.bin", "--manifest", d.manifest,
            "--descriptor", d.descriptor, "--extract-config", d.config});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("(") , std::string::npos);
  EXPECT_NE(r.out.find("/8)"), std::string::npos) << r.out;

  r = call({"predict", "--two-stage", "--model", dir / "two.bin", "--clip", dir / "clip20.csv",
            "--descriptor", d.descriptor, "--extract-config", d.config});
  ASSERT_EQ(r.code, 0) << r.err;
}
}  // namespace
}  // namespace psf::cli
