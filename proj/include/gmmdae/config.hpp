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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gmmdae/autoenc.hpp"
#include "gmmdae/density.hpp"
#include "gmmdae/eval.hpp"
#include "gmmdae/rankpool.hpp"
#include "gmmdae/scoring.hpp"
#include "gmmdae/synth.hpp"

namespace gmmdae {

/// Every setting of a pipeline run. File syntax is `key = value` per line
/// with `#` comments; `gmmdae config` prints the full key list.
struct PipelineConfig {
  std::uint64_t seed = 1;
  /// Directory that relative paths resolve against. Itself relative to the
  /// config file's directory.
  std::filesystem::path workdir = ".";

  struct Synth {
    std::filesystem::path output_dir = "corpus";
    std::size_t train_frames = 400;
    std::size_t val_frames = 200;
    std::size_t test_frames = 300;
    std::size_t patch_size = 64;
    double speed_min = 0.5;
    double speed_max = 1.5;
    double fast_factor = 5.0;
    double blob_radius = 12.0;
    double noise_std = 0.02;
    std::size_t segment_length = 20;
    std::string val_anomalies = "fast_motion:30-59;novel_texture:120-149";
    std::string test_anomalies =
        "fast_motion:40-79;novel_texture:130-169;fast_motion:220-249";
  } synth;

  RankPoolConfig rankpool;

  struct Train {
    std::filesystem::path manifest = "corpus/train_manifest.txt";
    std::vector<std::size_t> encoder_dims = {4096, 1024, 256, 64, 32};
    TrainConfig params;  // seed is derived from the master seed
    std::filesystem::path appearance_model = "models/appearance.dae";
    std::filesystem::path motion_model = "models/motion.dae";
    std::filesystem::path appearance_loss_log = "models/appearance_loss.txt";
    std::filesystem::path motion_loss_log = "models/motion_loss.txt";
  } train;

  struct Fit {
    EmConfig params;  // seed is derived from the master seed
    std::filesystem::path appearance_gmm = "models/appearance.gmm";
    std::filesystem::path motion_gmm = "models/motion.gmm";
    std::filesystem::path log = "models/em_log.txt";
  } fit;

  struct Score {
    std::filesystem::path manifest = "corpus/test_manifest.txt";
    std::filesystem::path output = "results/test_scores.csv";
    std::filesystem::path patch_output;  // optional per-patch dump
    std::size_t frame_count = 0;         // 0: frames 0..max scored frame
    std::array<double, 4> lambdas = {1.0, 1.0, 1.0, 1.0};
  } score;

  struct Eval {
    std::filesystem::path scores = "results/test_scores.csv";
    std::filesystem::path labels = "corpus/test_labels.txt";
    std::filesystem::path report = "results/eval_report.txt";
    bool grid = false;
    std::vector<double> grid_values = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
    std::filesystem::path validation_scores;
    std::filesystem::path validation_labels;
  } eval;

  /// Directory of the config file (or the working directory).
  std::filesystem::path base_dir = ".";

  /// Absolute form of a configured path; empty stays empty.
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Applies one `key = value` setting; throws ConfigError for unknown keys
/// or unparsable values.
void set_config_value(PipelineConfig& cfg, const std::string& key,
                      const std::string& value);
/// Applies a `key=value` override string.
void apply_override(PipelineConfig& cfg, const std::string& assignment);

PipelineConfig parse_config(const std::string& text,
                            const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// All keys with their current values, in file syntax.
std::string format_config(const PipelineConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace gmmdae
