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

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmmdae/autoenc.hpp"
#include "gmmdae/density.hpp"
#include "gmmdae/rankpool.hpp"
#include "gmmdae/tensor.hpp"

namespace gmmdae {

/// Late-fusion weights for (appearance likelihood, appearance PSNR, motion
/// likelihood, motion PSNR). Non-negative, finite, not all zero.
class FusionWeights {
 public:
  FusionWeights() = default;  // (1,1,1,1)
  FusionWeights(double l1, double l2, double l3, double l4);

  double lambda1() const noexcept { return l_[0]; }
  double lambda2() const noexcept { return l_[1]; }
  double lambda3() const noexcept { return l_[2]; }
  double lambda4() const noexcept { return l_[3]; }
  double operator[](std::size_t i) const { return l_.at(i); }

  friend bool operator==(const FusionWeights&, const FusionWeights&) = default;

 private:
  std::array<double, 4> l_{1.0, 1.0, 1.0, 1.0};
};

struct ScoreComponents {
  double p_oi = 0.0;     // appearance latent log-likelihood
  double psnr_oi = 0.0;  // appearance reconstruction PSNR
  double p_di = 0.0;     // motion latent log-likelihood
  double psnr_di = 0.0;  // motion reconstruction PSNR
};

struct ScoreRecord {
  long frame_index = 0;
  std::string sequence_id;
  ScoreComponents c;
  double anomaly = 0.0;
};

struct FrameScore {
  long frame_index = 0;
  double raw = 0.0;
  double normalized = 0.0;
  /// Components of the highest-scoring patch; empty for frames without any.
  std::optional<ScoreComponents> top;
};

inline constexpr double kMseFloor = 1e-12;

/// 10 log10(max(x) / MSE(x, x_hat)), MSE floored at kMseFloor. Uses max(x)
/// itself as the numerator, not its square. Requires max(x) > 0.
double psnr(const Tensor& x, const Tensor& x_hat);
double psnr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

/// A = -(l1 p_oi + l2 psnr_oi + l3 p_di + l4 psnr_di).
double fuse(const ScoreComponents& c, const FusionWeights& w);
double fuse(double p_oi, double psnr_oi, double p_di, double psnr_di,
            const FusionWeights& w);

/// Maximum anomaly among the records of one frame.
double frame_score(std::span<const ScoreRecord> records);

/// Min-max scaling to [0,1]; all zeros when the scores are constant.
std::vector<double> normalize_scores(std::span<const double> raw);

/// Groups patch records by frame, takes the per-frame maximum and normalizes
/// over the scene. Frames listed in `frames` without any record get the
/// scene minimum. When `frames` is empty, frames 0..max(frame_index) are used.
std::vector<FrameScore> aggregate_frames(std::span<const ScoreRecord> records,
                                         std::span<const long> frames = {});

/// Trained models of both pipelines.
struct PipelineModels {
  DaeModel appearance;
  DaeModel motion;
  GmmModel appearance_gmm;
  GmmModel motion_gmm;

  /// Throws IncompatibleModels when the pieces cannot be combined.
  void check_compatible(std::size_t patch_values) const;
};

/// Scores sequences against fixed models; caches the mixture factorizations.
class Scorer {
 public:
  Scorer(const PipelineModels& models, RankPoolConfig cfg, FusionWeights w);

  ScoreRecord score(const PatchSequence& seq) const;

 private:
  const PipelineModels& models_;
  RankPoolConfig cfg_;
  FusionWeights weights_;
  GmmEvaluator appearance_density_;
  GmmEvaluator motion_density_;
};

struct CorpusScores {
  std::vector<ScoreRecord> patches;
  std::vector<FrameScore> frames;
};

CorpusScores score_corpus(const PipelineModels& models,
                          std::span<const PatchSequence> corpus,
                          const RankPoolConfig& cfg, const FusionWeights& w,
                          std::span<const long> frames = {});

/// Score file: header plus `frame_index,p_oi,psnr_oi,p_di,psnr_di,anomaly,
/// normalized` per frame. Frames without patches carry `nan` components.
void write_score_file(std::span<const FrameScore> frames,
                      const std::filesystem::path& path);
std::vector<FrameScore> read_score_file(const std::filesystem::path& path);

/// Per-patch dump: `frame_index,sequence_id,p_oi,psnr_oi,p_di,psnr_di,anomaly`.
void write_patch_scores(std::span<const ScoreRecord> records,
                        const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace gmmdae
