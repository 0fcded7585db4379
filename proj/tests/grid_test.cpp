// Copyright 2026 The cuatrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "cuatrace/grid.hpp"
#include "cuatrace/grid_io.hpp"
#include "oracles.hpp"

namespace cuatrace {
namespace {

TEST(L2DistanceTest, Fixtures) {
  EXPECT_EQ(l2_distance(std::vector<float>{1, 0}, std::vector<float>{1, 0}), 0.0);
  EXPECT_EQ(l2_distance(std::vector<float>{0, 0}, std::vector<float>{3, 4}), 5.0);
}

TEST(L2DistanceTest, MatchesDirectSummation) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(8), b(8);
    double sum = 0.0;
    for (int k = 0; k < 8; ++k) {
      a[k] = g(rng);
      b[k] = g(rng);
      sum += (a[k] - b[k]) * (a[k] - b[k]);
    }
    const double expected = std::sqrt(sum);
    EXPECT_NEAR(l2_distance(a, b), expected, 1e-12 * expected);
  }
}

TEST(L2DistanceTest, SymmetricAndTriangleInequality) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(6), b(6), c(6);
    for (int k = 0; k < 6; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
      c[k] = u(rng);
    }
    EXPECT_EQ(l2_distance(a, b), l2_distance(b, a));
    EXPECT_LE(l2_distance(a, c), l2_distance(a, b) + l2_distance(b, c) + 1e-12);
  }
}

TEST(L2DistanceTest, DimensionMismatchThrows) {
  try {
    (void)l2_distance(std::vector<float>{1, 2}, std::vector<float>{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(CosineSimilarityTest, Fixtures) {
  EXPECT_EQ(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{1, 0}), 1.0);
  EXPECT_EQ(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{0, 1}), 0.0);
  EXPECT_EQ(cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{0, 0}), 1.0);
  EXPECT_EQ(cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{0, 2}), 0.0);
  EXPECT_THROW((void)cosine_similarity(std::vector<float>{1}, std::vector<float>{1, 2}), Error);
}

TEST(CosineSimilarityTest, ScaleInvariantAndBounded) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(5), b(5), ca(5);
    const double c = scale(rng);
    for (int k = 0; k < 5; ++k) {
      a[k] = g(rng);
      b[k] = g(rng);
      ca[k] = c * a[k];
    }
    const double s = cosine_similarity(a, b);
    EXPECT_NEAR(cosine_similarity(ca, b), s, 1e-9);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(CosineSimilarityTest, IdenticalVectorsNeverExceedOne) {
  std::mt19937_64 rng(14);
  std::normal_distribution<float> g;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<float> a(7);
    for (auto& x : a) x = g(rng);
    const double s = cosine_similarity(a, a);
    EXPECT_LE(s, 1.0);
    EXPECT_GT(s, 0.9999);
  }
}

TEST(FlattenIndexTest, Fixtures) {
  EXPECT_EQ(flatten_index(0, 0, 4, 5), 0u);
  EXPECT_EQ(flatten_index(1, 2, 4, 5), 7u);
  EXPECT_THROW((void)flatten_index(4, 0, 4, 5), Error);
  EXPECT_THROW((void)flatten_index(0, 5, 4, 5), Error);
  EXPECT_THROW((void)unflatten_index(20, 4, 5), Error);
}

TEST(FlattenIndexTest, RoundTripsOverGrid) {
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const auto k = flatten_index(i, j, 8, 8);
      EXPECT_EQ(unflatten_index(k, 8, 8), (GridCoord{i, j}));
    }
}

TEST(FeatureGridTest, RejectsBadShapesAndNonFinite) {
  EXPECT_THROW(FeatureGrid(1, 2, 2, 1, std::vector<float>(3)), Error);
  EXPECT_THROW(FeatureGrid(0, 2, 2, 1), Error);
  EXPECT_THROW(FeatureGrid(1, 1, 1, 1, {NAN}), Error);
  EXPECT_THROW(FeatureGrid(1, 1, 1, 1, {INFINITY}), Error);
  FeatureGrid g(1, 1, 2, 1);
  const float bad[] = {NAN};
  EXPECT_THROW(g.set_token(0, 0, bad), Error);
}

TEST(FeatureGridTest, LayoutIsFrameRowColDim) {
  std::vector<float> data(2 * 2 * 3 * 2);
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = float(k);
  FeatureGrid g(2, 2, 3, 2, data);
  EXPECT_EQ(g.token(1, 1, 2)[0], float(((1 * 2 + 1) * 3 + 2) * 2));
  EXPECT_EQ(g.token(1, 5)[1], g.token(1, 1, 2)[1]);
  EXPECT_EQ(g.frame(1).feature(0, 1)[0], g.token(1, 0, 1)[0]);
  EXPECT_EQ(g.slice(1, 1).token(0, 0)[0], g.token(1, 0)[0]);
}

TEST(GridIoTest, BinaryHeaderIsLittleEndian) {
  FeatureGrid g(1, 1, 2, 1, {1.0f, -2.5f});
  const Bytes b = encode_grid(g);
  ASSERT_EQ(b.size(), 24u + 8u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "EVGR");
  EXPECT_EQ(b[4], 1);  // version
  EXPECT_EQ(b[8], 1);  // T
  EXPECT_EQ(b[16], 2);  // W'
  // 1.0f == 0x3f800000
  EXPECT_EQ(b[24], 0x00);
  EXPECT_EQ(b[27], 0x3f);
}

TEST(GridIoTest, BinaryAndManifestRoundTrip) {
  std::mt19937_64 rng(15);
  const auto dir = std::filesystem::temp_directory_path() / "cuatrace_grid_io";
  std::filesystem::create_directories(dir);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureGrid g = oracle::fuzz_grid(rng, 3, 6, 5);
    EXPECT_EQ(decode_grid(encode_grid(g)), g);
    write_grid_manifest(dir / "g.json", g);
    EXPECT_EQ(load_grid(dir / "g.json"), g);
    write_grid(dir / "g.evgr", g);
    EXPECT_EQ(load_grid(dir / "g.evgr"), g);
  }
}

TEST(GridIoTest, RejectsCorruptInput) {
  Bytes b = encode_grid(FeatureGrid(1, 2, 2, 1));
  Bytes truncated(b.begin(), b.end() - 1);
  EXPECT_THROW(decode_grid(truncated), Error);
  Bytes bad_magic = b;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_grid(bad_magic), Error);
  Bytes trailing = b;
  trailing.push_back(0);
  EXPECT_THROW(decode_grid(trailing), Error);
}

}  // namespace
}  // namespace cuatrace
