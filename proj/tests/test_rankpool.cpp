// Copyright 2026 The gmmdae Authors.
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

#include "gmmdae/error.hpp"
#include "gmmdae/rankpool.hpp"
#include "oracles.hpp"

namespace gmmdae {
namespace {

PatchSequence make_sequence(std::size_t t, std::size_t h, std::size_t w,
                            std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  PatchSequence seq;
  for (std::size_t i = 0; i < t; ++i) {
    Tensor p({h, w});
    for (auto& v : p.data()) v = u(rng);
    seq.patches.push_back(std::move(p));
  }
  return seq;
}

TEST(RankPoolCoefficients, SmallWindows) {
  EXPECT_EQ(rank_pool_coefficients(1), (std::vector<double>{0.0}));
  const auto a2 = rank_pool_coefficients(2);
  ASSERT_EQ(a2.size(), 2u);
  EXPECT_DOUBLE_EQ(a2[0], -0.5);
  EXPECT_DOUBLE_EQ(a2[1], 0.5);
}

TEST(RankPoolCoefficients, TenFrameWindowMatchesHarmonicForm) {
  const auto a = rank_pool_coefficients(10);
  double h10 = 0.0;
  for (int j = 1; j <= 10; ++j) h10 += 1.0 / j;
  EXPECT_NEAR(a[9], 0.9, 1e-15);
  EXPECT_NEAR(a[0], 20.0 - 11.0 * h10, 1e-13);
}

TEST(RankPoolCoefficients, MatchDoubleSumAndSumToZero) {
  for (std::size_t t = 1; t <= 40; ++t) {
    const auto a = rank_pool_coefficients(t);
    ASSERT_EQ(a.size(), t);
    double sum = 0.0;
    for (std::size_t i = 1; i <= t; ++i) {
      EXPECT_NEAR(a[i - 1], oracle::rank_pool_alpha(i, t), 1e-12 * (1.0 + std::abs(oracle::rank_pool_alpha(i, t))));
      sum += a[i - 1];
    }
    EXPECT_NEAR(sum, 0.0, 1e-12 * static_cast<double>(t));
  }
}

TEST(RankPoolCoefficients, RejectsEmptyWindow) {
  EXPECT_THROW(rank_pool_coefficients(0), InvalidArgument);
}

TEST(DynamicImage, SingleFrameIsZero) {
  std::mt19937_64 rng(1);
  auto seq = make_sequence(1, 4, 4, rng);
  seq.frame_index = 17;
  const auto d = dynamic_image(seq, {1});
  EXPECT_EQ(d.frame_index, 17);
  for (float v : d.image.data()) EXPECT_EQ(v, 0.0F);
}

TEST(DynamicImage, TwoFramesIsHalfDifference) {
  std::mt19937_64 rng(2);
  const auto seq = make_sequence(2, 5, 3, rng);
  const auto d = dynamic_image(seq, {2});
  for (std::size_t k = 0; k < d.image.size(); ++k) {
    EXPECT_FLOAT_EQ(d.image[k], (seq.patches[1][k] - seq.patches[0][k]) / 2.0F);
  }
}

TEST(DynamicImage, ConstantSequenceGivesConstantImage) {
  for (std::size_t t : {3u, 7u, 10u}) {
    PatchSequence seq;
    for (std::size_t i = 0; i < t; ++i) {
      Tensor p({3, 3});
      for (auto& v : p.data()) v = 0.4F;
      seq.patches.push_back(p);
    }
    double expected = 0.0;
    for (std::size_t i = 1; i <= t; ++i) expected += 0.4F * oracle::rank_pool_alpha(i, t);
    const auto d = dynamic_image(seq, {t});
    for (float v : d.image.data()) EXPECT_NEAR(v, expected, 1e-6);
  }
}

TEST(DynamicImage, MatchesDirectSum) {
  std::mt19937_64 rng(3);
  for (std::size_t t = 1; t <= 12; ++t) {
    const auto seq = make_sequence(t, 6, 5, rng);
    const auto d = dynamic_image(seq, {t});
    for (std::size_t k = 0; k < d.image.size(); ++k) {
      double ref = 0.0;
      for (std::size_t i = 1; i <= t; ++i) {
        ref += oracle::rank_pool_alpha(i, t) * static_cast<double>(seq.patches[i - 1][k]);
      }
      EXPECT_NEAR(d.image[k], static_cast<float>(ref), 1e-6 * (1.0 + std::abs(ref)));
    }
  }
}

TEST(DynamicImage, RejectsLengthAndShapeMismatch) {
  std::mt19937_64 rng(4);
  auto seq = make_sequence(3, 4, 4, rng);
  EXPECT_THROW(dynamic_image(seq, {4}), InvalidArgument);
  seq.patches[1] = Tensor({4, 5});
  EXPECT_THROW(dynamic_image(seq, {3}), InvalidArgument);
}

}  // namespace
}  // namespace gmmdae
