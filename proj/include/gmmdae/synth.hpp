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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmmdae/density.hpp"
#include "gmmdae/eval.hpp"
#include "gmmdae/tensor.hpp"

namespace gmmdae {

struct MixtureSpec {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MixtureSample {
  SampleMatrix samples;                 // n x d
  std::vector<std::size_t> components;  // generating component per row
};

MixtureSample sample_mixture(const MixtureSpec& spec);

enum class Texture { kChecker, kGradient, kStripes, kSpots };
enum class AnomalyType { kFastMotion, kNovelTexture };

struct AnomalyInjection {
  long first_frame = 0;  // inclusive
  long last_frame = 0;   // inclusive
  AnomalyType type = AnomalyType::kFastMotion;
};

/// One textured blob crossing a fixed camera view. The blob keeps a texture,
/// heading and speed for `segment_length` frames, then draws new ones.
/// Training textures come from {checker, gradient, stripes}; spots appear
/// only in novel_texture injections.
struct VideoSpec {
  std::size_t frames = 300;
  std::size_t patch_size = 64;
  std::size_t t = 10;
  double speed_min = 0.5;  // pixels per frame
  double speed_max = 1.5;
  double fast_factor = 5.0;  // multiplier inside fast_motion ranges, >= 4
  double blob_radius = 12.0;
  double noise_std = 0.02;
  std::size_t segment_length = 20;
  std::vector<AnomalyInjection> anomalies;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticVideo {
  std::vector<PatchSequence> sequences;  // one per frame
  std::vector<FrameLabel> labels;
  std::vector<Texture> textures;         // texture of each frame's blob
};

/// Renders every frame's patch window in memory.
SyntheticVideo render_video(const VideoSpec& spec);

struct VideoCorpusFiles {
  std::filesystem::path manifest;
  std::filesystem::path labels;
  std::vector<FrameLabel> frame_labels;
};

/// Writes `<name>_manifest.txt`, `<name>_labels.txt` and one GDT1 file per
/// frame under `<dir>/<name>/` into `dir`, which must already exist.
VideoCorpusFiles make_video_corpus(const VideoSpec& spec,
                                   const std::filesystem::path& dir,
                                   const std::string& name);

/// Parses `fast_motion:40-50;novel_texture:100-120` style lists.
std::vector<AnomalyInjection> parse_anomalies(const std::string& text);
std::string format_anomalies(const std::vector<AnomalyInjection>& list);

}  // namespace gmmdae
