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

#include <random>

#include "gmmdae/error.hpp"
#include "gmmdae/eval.hpp"
#include "gmmdae/binary_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace gmmdae {
namespace {

LabeledScores random_instance(std::mt19937_64& rng, std::size_t n, int levels) {
  LabeledScores ls;
  std::uniform_int_distribution<int> level(0, levels - 1);
  std::bernoulli_distribution coin(0.4);
  for (std::size_t i = 0; i < n; ++i) {
    ls.scores.push_back(static_cast<double>(level(rng)) / levels);
    ls.labels.push_back(coin(rng) ? 1 : 0);
  }
  ls.labels[0] = 0;
  ls.labels[1] = 1;
  return ls;
}

TEST(Auroc, PerfectAndTiedCases) {
  EXPECT_EQ(auroc({{0.2, 0.8}, {0, 1}}), 1.0);
  EXPECT_EQ(auroc({{0.8, 0.2}, {0, 1}}), 0.0);
  EXPECT_EQ(auroc({{0.3, 0.3, 0.3, 0.3}, {0, 1, 1, 0}}), 0.5);
}

TEST(Auroc, RequiresBothClassesAndMatchingLengths) {
  EXPECT_THROW(auroc({{0.1, 0.2}, {1, 1}}), InvalidArgument);
  EXPECT_THROW(auroc({{0.1, 0.2}, {0, 1, 1}}), InvalidArgument);
  EXPECT_THROW(auroc({{0.1, 0.2}, {0, 2}}), InvalidArgument);
}

TEST(Auroc, MatchesPairwiseBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ls = random_instance(rng, 200, trial % 2 == 0 ? 7 : 100000);
    EXPECT_NEAR(auroc(ls), oracle::pairwise_auroc(ls), 1e-12);
  }
}

TEST(Roc, PerfectSeparationPassesThroughCorner) {
  const auto curve = roc_curve({{0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}});
  bool corner = false;
  for (const auto& p : curve) corner |= (p.fpr == 0.0 && p.tpr == 1.0);
  EXPECT_TRUE(corner);
  EXPECT_EQ(curve.front().fpr, 0.0);
  EXPECT_EQ(curve.front().tpr, 0.0);
  EXPECT_EQ(curve.back().fpr, 1.0);
  EXPECT_EQ(curve.back().tpr, 1.0);
}

TEST(Roc, IndependentLabelsGiveChanceArea) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u;
  LabeledScores ls;
  for (int i = 0; i < 1000; ++i) {
    ls.scores.push_back(u(rng));
    ls.labels.push_back(i % 2);
  }
  std::shuffle(ls.labels.begin(), ls.labels.end(), rng);
  EXPECT_NEAR(trapezoid_area(roc_curve(ls)), 0.5, 0.1);
}

TEST(Roc, TrapezoidAreaEqualsAuroc) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ls = random_instance(rng, 120, trial % 3 == 0 ? 5 : 1000);
    EXPECT_NEAR(trapezoid_area(roc_curve(ls)), auroc(ls), 1e-12);
  }
}

TEST(FrameAuroc, RequiresMatchingFrameSets) {
  std::vector<FrameScore> frames(3);
  for (long i = 0; i < 3; ++i) {
    frames[static_cast<std::size_t>(i)].frame_index = i;
    frames[static_cast<std::size_t>(i)].normalized = static_cast<double>(i) / 2;
  }
  const std::vector<FrameLabel> labels{{0, 0}, {1, 0}, {2, 1}};
  EXPECT_EQ(frame_auroc(frames, labels), 1.0);
  const std::vector<FrameLabel> missing{{0, 0}, {2, 1}};
  EXPECT_THROW(frame_auroc(frames, missing), InvalidArgument);
  const std::vector<FrameLabel> extra{{0, 0}, {1, 0}, {2, 1}, {3, 1}};
  EXPECT_THROW(frame_auroc(frames, extra), InvalidArgument);
}

// Only the appearance likelihood separates the classes.
std::vector<ScoreRecord> known_optimum_records(std::vector<FrameLabel>& labels) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<ScoreRecord> recs;
  labels.clear();
  for (long f = 0; f < 60; ++f) {
    const int y = (f % 5 == 0) ? 1 : 0;
    labels.emplace_back(f, y);
    ScoreRecord r;
    r.frame_index = f;
    r.c.p_oi = y ? -100.0 - static_cast<double>(f) : -static_cast<double>(f % 7);
    r.c.psnr_oi = 20.0 * noise(rng);
    r.c.p_di = 20.0 * noise(rng);
    r.c.psnr_di = 20.0 * noise(rng);
    recs.push_back(r);
  }
  return recs;
}

TEST(GridSearch, SinglePointGridReturnsIt) {
  std::vector<FrameLabel> labels;
  const auto recs = known_optimum_records(labels);
  GridSpec grid;
  grid.values = {{{0.5}, {2.0}, {0.25}, {4.0}}};
  const auto r = grid_search(recs, labels, grid);
  EXPECT_EQ(r.weights, FusionWeights(0.5, 2.0, 0.25, 4.0));
  EXPECT_EQ(r.evaluated, 1u);
}

TEST(GridSearch, FindsKnownOptimum) {
  std::vector<FrameLabel> labels;
  const auto recs = known_optimum_records(labels);
  const auto r = grid_search(recs, labels, GridSpec::uniform({0.0, 1.0}));
  EXPECT_EQ(r.weights, FusionWeights(1, 0, 0, 0));
  EXPECT_EQ(r.auroc, 1.0);
  EXPECT_EQ(r.evaluated, 15u);
}

TEST(GridSearch, InvariantToCommonComponentScaling) {
  std::vector<FrameLabel> labels;
  auto recs = known_optimum_records(labels);
  const auto base = grid_search(recs, labels, GridSpec::default_grid());
  for (auto& r : recs) {
    r.c.p_oi *= 3.5;
    r.c.psnr_oi *= 3.5;
    r.c.p_di *= 3.5;
    r.c.psnr_di *= 3.5;
  }
  const auto scaled = grid_search(recs, labels, GridSpec::default_grid());
  EXPECT_EQ(scaled.auroc, base.auroc);
  EXPECT_EQ(scaled.weights, base.weights);
  EXPECT_EQ(base.evaluated, 6u * 6u * 6u * 6u - 1u);
}

TEST(GridSpec, Validation) {
  EXPECT_THROW(GridSpec::uniform({}).validate(), InvalidArgument);
  EXPECT_THROW(GridSpec::uniform({-1.0, 1.0}).validate(), InvalidArgument);
  EXPECT_THROW(GridSpec::uniform({0.0}).validate(), InvalidArgument);
  EXPECT_NO_THROW(GridSpec::default_grid().validate());
}

TEST(Labels, RoundTripAndMalformedInput) {
  testing::TempDir dir;
  const std::vector<FrameLabel> labels{{0, 0}, {5, 1}, {7, 0}};
  const auto p = dir.path() / "labels.txt";
  write_labels(labels, p);
  EXPECT_EQ(read_labels(p), labels);

  binary::write_text_file(p, "# c\n0,0\n1,3\n");
  EXPECT_THROW(read_labels(p), FormatError);
  binary::write_text_file(p, "0,0\n0,1\n");
  EXPECT_THROW(read_labels(p), FormatError);
}

}  // namespace
}  // namespace gmmdae
