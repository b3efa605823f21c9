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

#include <cmath>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "psf/error.hpp"
#include "psf/sigcore.hpp"

namespace psf
{
namespace
{
using testing::max_rel_diff;
using testing::random_path;
using testing::signature_bruteforce;

std::vector<double> all(const TruncatedSignature & s)
{
  auto c = s.coefficients();
  return {c.begin(), c.end()};
}

TEST(SegmentSignature, OneDimensionalClosedForm)
{
  const std::vector<double> a{0.0}, b{2.0};
  auto s = segment_signature(a, b, 3);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.coefficients()[0], 2.0);
  EXPECT_DOUBLE_EQ(s.coefficients()[1], 2.0);
  EXPECT_DOUBLE_EQ(s.coefficients()[2], 4.0 / 3.0);
}

TEST(SegmentSignature, TwoDimensionalLevelTwo)
{
  const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
  auto s = segment_signature(a, b, 2);
  EXPECT_EQ(all(s), (std::vector<double>{3, 4, 4.5, 6, 6, 8}));
  EXPECT_DOUBLE_EQ(s.at({0, 1}), 6.0);
  EXPECT_DOUBLE_EQ(s.at({}), 1.0);
}

TEST(SegmentSignature, ZeroIncrement)
{
  const std::vector<double> p{1.5, -2.0};
  auto s = segment_signature(p, p, 2);
  EXPECT_EQ(all(s), std::vector<double>(6, 0.0));
}

TEST(SegmentSignature, Errors)
{
  const std::vector<double> a{0.0, 0.0}, b{1.0};
  EXPECT_THROW(segment_signature(a, b, 2), InputError);
  EXPECT_THROW(segment_signature(a, a, 0), InputError);
}

TEST(ChenConcat, RightAngleExample)
{
  const std::vector<double> p0{0, 0}, p1{1, 0}, p2{0, 1};
  auto s = chen_concat(segment_signature(p0, p1, 2), segment_signature(p1, p2, 2));
  const std::vector<double> expected{0, 1, 0, 0.5, -0.5, 0.5};
  auto got = all(s);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_NEAR(got[i], expected[i], 1e-15) << i;
  }
  // The frozen values agree with the quadrature oracle.
  auto path = DiscretePath::from_points({{0, 0}, {1, 0}, {0, 1}});
  auto brute = signature_bruteforce(path, 2, 10000);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_NEAR(brute.coefficients()[i], expected[i], 1e-6) << i;
  }
}

TEST(ChenConcat, IdentityElement)
{
  std::mt19937_64 rng(11);
  auto path = random_path(rng, 3, 6);
  auto s = path_signature(path, 3);
  auto end = path.point(path.length() - 1);
  auto e = segment_signature(end, end, 3);
  EXPECT_EQ(chen_concat(s, e), s);
  EXPECT_EQ(chen_concat(e, s), s);
}

TEST(ChenConcat, OneDimensional)
{
  const std::vector<double> z{0}, one{1}, two{2};
  auto s = chen_concat(segment_signature(z, one, 2), segment_signature(one, two, 2));
  EXPECT_EQ(all(s), (std::vector<double>{2, 2}));
}

TEST(ChenConcat, Mismatch)
{
  TruncatedSignature a(2, 2), b(3, 2), c(2, 3);
  EXPECT_THROW(chen_concat(a, b), InputError);
  EXPECT_THROW(chen_concat(a, c), InputError);
}

TEST(PathSignature, CollinearMatchesSegment)
{
  auto path = DiscretePath::from_points({{0, 0}, {1.5, 2}, {3, 4}});
  auto s = path_signature(path, 2);
  const std::vector<double> expected{3, 4, 4.5, 6, 6, 8};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_NEAR(s.coefficients()[i], expected[i], 1e-14);
  }
}

TEST(PathSignature, SinglePointIsIdentity)
{
  auto path = DiscretePath::from_points({{0.3, -0.7, 2.0}});
  for (int level = 1; level <= 4; ++level) {
    auto s = path_signature(path, level);
    EXPECT_EQ(all(s), std::vector<double>(s.size(), 0.0));
  }
}

TEST(PathSignature, AppendSegmentMatchesChen)
{
  std::mt19937_64 rng(5);
  auto path = random_path(rng, 3, 2);
  auto s = path_signature(path, 4);
  auto c = chen_concat(TruncatedSignature(3, 4), segment_signature(path.point(0), path.point(1), 4));
  EXPECT_LT(max_rel_diff(s, c), 1e-14);
}

TEST(PathSignature, RejectsInvalidPaths)
{
  EXPECT_THROW(DiscretePath(2, {1.0, 2.0, 3.0}), InputError);
  EXPECT_THROW(DiscretePath(2, {1.0, NAN}), InputError);
  EXPECT_THROW(DiscretePath(0, {}), InputError);
  EXPECT_THROW(DiscretePath::from_points({{1.0, 2.0}, {1.0}}), InputError);
}

TEST(LevyArea, Examples)
{
  const std::vector<double> a{0, 0}, b{3, 4};
  EXPECT_DOUBLE_EQ(levy_area(segment_signature(a, b, 2)), 0.0);

  auto forward = DiscretePath::from_points({{0, 0}, {1, 0}, {0, 1}});
  EXPECT_NEAR(levy_area(path_signature(forward, 2)), 1.0, 1e-15);
  auto backward = DiscretePath::from_points({{0, 1}, {1, 0}, {0, 0}});
  EXPECT_NEAR(levy_area(path_signature(backward, 2)), -1.0, 1e-15);

  // Sign confirmed independently by quadrature.
  EXPECT_NEAR(levy_area(signature_bruteforce(forward, 2, 4000)), 1.0, 1e-6);
  EXPECT_NEAR(levy_area(signature_bruteforce(backward, 2, 4000)), -1.0, 1e-6);
}

TEST(LevyArea, Errors)
{
  EXPECT_THROW(levy_area(TruncatedSignature(3, 2)), InputError);
  EXPECT_THROW(levy_area(TruncatedSignature(2, 1)), InputError);
}

TEST(SignatureDimension, Values)
{
  EXPECT_EQ(signature_dimension(2, 2, false), 6u);
  EXPECT_EQ(signature_dimension(2, 2, true), 7u);
  EXPECT_EQ(signature_dimension(1, 5, false), 5u);
  EXPECT_EQ(signature_dimension(1, 5, true), 6u);
  EXPECT_EQ(signature_dimension(60, 4, false), 13179660u);
  EXPECT_EQ(signature_dimension(7, 0, true), 1u);
  EXPECT_THROW(signature_dimension(1u << 20, 4, false), InputError);
}

TEST(SignatureDimension, MatchesGeometricSeries)
{
  for (std::uint64_t d = 2; d <= 9; ++d) {
    for (std::uint64_t n = 0; n <= 6; ++n) {
      std::uint64_t pow = 1;
      for (std::uint64_t i = 0; i <= n; ++i) pow *= d;
      EXPECT_EQ(signature_dimension(d, n, true), (pow - 1) / (d - 1));
      EXPECT_EQ(signature_dimension(d, n, false), (pow - d) / (d - 1));
    }
  }
}

TEST(Bruteforce, StraightSegment)
{
  auto path = DiscretePath::from_points({{0, 0}, {3, 4}});
  auto exact = path_signature(path, 2);
  auto brute = signature_bruteforce(path, 2, 10000);
  for (std::size_t i = 0; i < exact.size(); ++i) {
    EXPECT_NEAR(brute.coefficients()[i], exact.coefficients()[i],
                1e-3 * std::abs(exact.coefficients()[i]));
  }
}

TEST(Bruteforce, OneDimensionalLevelOneIsExact)
{
  auto path = DiscretePath::from_points({{0.25}, {-1.5}, {3.0}, {2.0}});
  for (std::size_t k : {1u, 7u, 1000u}) {
    auto brute = signature_bruteforce(path, 3, k);
    EXPECT_NEAR(brute.coefficients()[0], 1.75, 1e-12);
  }
}

TEST(Bruteforce, ZeroPath)
{
  auto path = DiscretePath::from_points({{1, 1}, {1, 1}, {1, 1}});
  auto brute = signature_bruteforce(path, 3, 100);
  EXPECT_EQ(all(brute), std::vector<double>(brute.size(), 0.0));
}

// Property suites.

TEST(SignatureProperties, ChenIdentityAtRandomSplit)
{
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng() % 4, L = 2 + rng() % 19;
    const int n = 1 + static_cast<int>(rng() % 4);
    auto path = random_path(rng, d, L);
    const std::size_t split = 1 + rng() % (L - 1);
    auto view = path.view();
    auto whole = path_signature(path, n);
    auto halves = chen_concat(path_signature(view.slice(0, split), n),
                              path_signature(view.slice(split, L - 1), n));
    EXPECT_LT(max_rel_diff(halves, whole), 1e-10);
  }
}

TEST(SignatureProperties, ShuffleIdentity)
{
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = path_signature(random_path(rng, 2, 2 + rng() % 15), 2);
    const double prod = s.at({0}) * s.at({1});
    EXPECT_LE(std::abs(prod - (s.at({0, 1}) + s.at({1, 0}))), 1e-10 * std::max(1.0, std::abs(prod)));
  }
}

TEST(SignatureProperties, ReparameterizationInvariance)
{
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + rng() % 4, L = 2 + rng() % 10;
    auto path = random_path(rng, d, L);
    const std::size_t at = rng() % (L - 1);
    const double lambda = u(rng);
    std::vector<double> coords(path.coords().begin(), path.coords().end());
    std::vector<double> mid(d);
    for (std::size_t i = 0; i < d; ++i) {
      mid[i] = path.point(at)[i] + lambda * (path.point(at + 1)[i] - path.point(at)[i]);
    }
    coords.insert(coords.begin() + static_cast<std::ptrdiff_t>((at + 1) * d), mid.begin(), mid.end());
    DiscretePath refined(d, std::move(coords));
    EXPECT_LT(max_rel_diff(path_signature(refined, 4), path_signature(path, 4)), 1e-10);
  }
}

TEST(SignatureProperties, TimeReversalCancels)
{
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 30; ++trial) {
    auto path = random_path(rng, 1 + rng() % 4, 1 + rng() % 12);
    auto round_trip = chen_concat(path_signature(path, 4), path_signature(path.reversed(), 4));
    for (double c : round_trip.coefficients()) {
      EXPECT_NEAR(c, 0.0, 1e-10);
    }
  }
}

TEST(SignatureProperties, TranslationIsBitIdenticalOnDyadicGrid)
{
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + rng() % 4;
    auto path = testing::random_dyadic_path(rng, d, 2 + rng() % 10);
    std::vector<double> offset(d);
    for (auto & o : offset) o = static_cast<double>(static_cast<int>(rng() % 17) - 8);
    EXPECT_EQ(path_signature(path.translated(offset), 4), path_signature(path, 4));
  }
}

TEST(SignatureProperties, SizeIndependentOfLength)
{
  std::mt19937_64 rng(606);
  for (std::size_t L = 1; L <= 100; ++L) {
    EXPECT_EQ(path_signature(random_path(rng, 3, L), 3).size(), 39u);
  }
}

TEST(SignatureProperties, OneDimensionalClosedForm)
{
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double delta = u(rng);
    const std::vector<double> a{0.0}, b{delta};
    auto s = path_signature(DiscretePath(1, {0.0, delta * 0.3, delta}), 6);
    double expected = 1.0;
    for (int k = 1; k <= 6; ++k) {
      expected *= delta / k;
      EXPECT_NEAR(s.coefficients()[k - 1], expected, 1e-12 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST(SignatureProperties, OracleAgreement)
{
  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 5; ++trial) {
    auto path = random_path(rng, 1 + rng() % 3, 2 + rng() % 7);
    auto exact = path_signature(path, 3);
    auto brute = signature_bruteforce(path, 3, 10000);
    EXPECT_LT(max_rel_diff(brute, exact), 1e-3);
  }
}
}  // namespace
}  // namespace psf
