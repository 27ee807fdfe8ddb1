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
#include <span>
#include <utility>
#include <vector>

#include "gmmdae/scoring.hpp"

namespace gmmdae {

/// Parallel score/label lists; labels are 0 (normal) or 1 (abnormal).
struct LabeledScores {
  std::vector<double> scores;
  std::vector<int> labels;

  /// Throws InvalidArgument unless both classes are present.
  void validate() const;
};

/// P(score_pos > score_neg) + 0.5 P(equal), computed from midranks.
double auroc(const LabeledScores& ls);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// One point per distinct threshold, in descending threshold order, from
/// (0,0) to (1,1). Tied scores produce a single diagonal step.
std::vector<RocPoint> roc_curve(const LabeledScores& ls);
double trapezoid_area(std::span<const RocPoint> curve);

/// Candidate values per fusion weight.
struct GridSpec {
  std::array<std::vector<double>, 4> values;

  static GridSpec uniform(std::vector<double> candidates);
  /// {0, 0.25, 0.5, 1, 2, 4} for every weight.
  static GridSpec default_grid();
  void validate() const;
};

struct GridResult {
  FusionWeights weights;
  double auroc = 0.0;
  std::size_t evaluated = 0;
};

using FrameLabel = std::pair<long, int>;

/// Frame-level AUROC of normalized frame scores against frame labels. Every
/// labeled frame must be scored and vice versa.
double frame_auroc(std::span<const FrameScore> frames,
                   std::span<const FrameLabel> labels);

/// Exhaustive search over the grid (lambda1 outermost, lambda4 innermost,
/// all-zero point skipped). Each point re-fuses the patch components,
/// aggregates frames and normalizes before computing AUROC. The first point
/// reaching the best AUROC wins.
GridResult grid_search(std::span<const ScoreRecord> components,
                       std::span<const FrameLabel> labels, const GridSpec& grid);

/// Labels file: `frame_index,label` lines, `#` comments allowed.
std::vector<FrameLabel> read_labels(const std::filesystem::path& path);
void write_labels(std::span<const FrameLabel> labels,
                  const std::filesystem::path& path);

}  // namespace gmmdae
