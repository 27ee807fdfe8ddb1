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

#include "gmmdae/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "gmmdae/binary_io.hpp"
#include "gmmdae/error.hpp"

namespace gmmdae {

FusionWeights::FusionWeights(double l1, double l2, double l3, double l4)
    : l_{l1, l2, l3, l4} {
  bool any_positive = false;
  for (double v : l_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("fusion weights must be finite and non-negative");
    }
    any_positive = any_positive || v > 0.0;
  }
  if (!any_positive) throw InvalidArgument("at least one fusion weight must be positive");
}

// ---------------------------------------------------------------------------

namespace {

double psnr_from(double peak, double mse) {
  if (!(peak > 0.0)) {
    throw InvalidArgument("PSNR needs max(x) > 0, got " + std::to_string(peak));
  }
  return 10.0 * std::log10(peak / std::max(mse, kMseFloor));
}

}  // namespace

double psnr(const Tensor& x, const Tensor& x_hat) {
  if (x.shape() != x_hat.shape()) {
    throw InvalidArgument("PSNR: shapes " + shape_to_string(x.shape()) + " and " +
                          shape_to_string(x_hat.shape()) + " differ");
  }
  double peak = -std::numeric_limits<double>::infinity();
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i];
    const double diff = a - static_cast<double>(x_hat[i]);
    peak = std::max(peak, a);
    sse += diff * diff;
  }
  return psnr_from(peak, sse / static_cast<double>(x.size()));
}

double psnr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size() || x.size() == 0) {
    throw InvalidArgument("PSNR: vectors must be non-empty and equal in length");
  }
  return psnr_from(x.maxCoeff(),
                   (x - x_hat).squaredNorm() / static_cast<double>(x.size()));
}

double fuse(double p_oi, double psnr_oi, double p_di, double psnr_di,
            const FusionWeights& w) {
  if (!std::isfinite(p_oi) || !std::isfinite(psnr_oi) || !std::isfinite(p_di) ||
      !std::isfinite(psnr_di)) {
    throw NumericalError("fuse: non-finite score component");
  }
  return -(w.lambda1() * p_oi + w.lambda2() * psnr_oi + w.lambda3() * p_di +
           w.lambda4() * psnr_di);
}

double fuse(const ScoreComponents& c, const FusionWeights& w) {
  return fuse(c.p_oi, c.psnr_oi, c.p_di, c.psnr_di, w);
}

double frame_score(std::span<const ScoreRecord> records) {
  if (records.empty()) throw InvalidArgument("frame_score needs at least one record");
  double best = records.front().anomaly;
  for (const auto& r : records) {
    if (r.frame_index != records.front().frame_index) {
      throw InvalidArgument("frame_score: records span several frames");
    }
    best = std::max(best, r.anomaly);
  }
  return best;
}

std::vector<double> normalize_scores(std::span<const double> raw) {
  if (raw.empty()) throw InvalidArgument("normalize_scores needs at least one score");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double range = *hi - *lo;
  std::vector<double> out(raw.size(), 0.0);
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - *lo) / range;
  return out;
}

std::vector<FrameScore> aggregate_frames(std::span<const ScoreRecord> records,
                                         std::span<const long> frames) {
  std::map<long, const ScoreRecord*> top;
  for (const auto& r : records) {
    auto [it, inserted] = top.emplace(r.frame_index, &r);
    if (!inserted && r.anomaly > it->second->anomaly) it->second = &r;
  }
  std::vector<long> frame_list(frames.begin(), frames.end());
  if (frame_list.empty() && !top.empty()) {
    for (long f = 0; f <= top.rbegin()->first; ++f) frame_list.push_back(f);
  }
  const std::set<long> listed(frame_list.begin(), frame_list.end());
  for (const auto& [f, rec] : top) {
    if (!listed.contains(f)) {
      throw InvalidArgument("record for frame " + std::to_string(f) +
                            " lies outside the scored frame list");
    }
  }
  if (frame_list.empty()) return {};

  double scene_min = std::numeric_limits<double>::infinity();
  for (const auto& [f, rec] : top) scene_min = std::min(scene_min, rec->anomaly);
  if (top.empty()) scene_min = 0.0;

  std::vector<FrameScore> out;
  std::vector<double> raw;
  out.reserve(frame_list.size());
  for (long f : frame_list) {
    FrameScore fs;
    fs.frame_index = f;
    if (auto it = top.find(f); it != top.end()) {
      fs.raw = it->second->anomaly;
      fs.top = it->second->c;
    } else {
      fs.raw = scene_min;
    }
    raw.push_back(fs.raw);
    out.push_back(fs);
  }
  const auto norm = normalize_scores(raw);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].normalized = norm[i];
  return out;
}

// ---------------------------------------------------------------------------

void PipelineModels::check_compatible(std::size_t patch_values) const {
  auto check_pair = [](const DaeModel& dae, const GmmModel& gmm, const char* name) {
    if (dae.latent_dim() != gmm.d()) {
      throw IncompatibleModels(std::string(name) + " autoencoder bottleneck is " +
                               std::to_string(dae.latent_dim()) +
                               " but its mixture has d=" + std::to_string(gmm.d()));
    }
  };
  check_pair(appearance, appearance_gmm, "appearance");
  check_pair(motion, motion_gmm, "motion");
  if (appearance.input_dim() != patch_values || motion.input_dim() != patch_values) {
    throw IncompatibleModels("autoencoder inputs (" +
                             std::to_string(appearance.input_dim()) + ", " +
                             std::to_string(motion.input_dim()) +
                             ") do not match patches of " +
                             std::to_string(patch_values) + " values");
  }
}

Scorer::Scorer(const PipelineModels& models, RankPoolConfig cfg, FusionWeights w)
    : models_(models),
      cfg_(cfg),
      weights_(w),
      appearance_density_(models.appearance_gmm),
      motion_density_(models.motion_gmm) {}

ScoreRecord Scorer::score(const PatchSequence& seq) const {
  try {
    const Tensor& patch = seq.current();
    const DynamicImage di = dynamic_image(seq, cfg_);
    const Reconstruction app = reconstruct(models_.appearance, patch);
    const Reconstruction mot = reconstruct(models_.motion, di.image);

    ScoreRecord r;
    r.frame_index = seq.frame_index;
    r.sequence_id = seq.sequence_id;
    r.c.p_oi = appearance_density_.log_likelihood(app.z);
    r.c.psnr_oi = psnr(app.input, app.x_hat);
    r.c.p_di = motion_density_.log_likelihood(mot.z);
    r.c.psnr_di = psnr(mot.input, mot.x_hat);
    r.anomaly = fuse(r.c, weights_);
    return r;
  } catch (const Error& e) {
    throw Error(e.kind(), "sequence " + seq.sequence_id + ": " + e.what());
  }
}

CorpusScores score_corpus(const PipelineModels& models,
                          std::span<const PatchSequence> corpus,
                          const RankPoolConfig& cfg, const FusionWeights& w,
                          std::span<const long> frames) {
  CorpusScores out;
  if (corpus.empty()) return out;
  models.check_compatible(corpus.front().current().size());
  const Scorer scorer(models, cfg, w);
  out.patches.reserve(corpus.size());
  for (const auto& seq : corpus) out.patches.push_back(scorer.score(seq));
  out.frames = aggregate_frames(out.patches, frames);
  return out;
}

// ---------------------------------------------------------------------------
// Text formats

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

constexpr std::string_view kScoreHeader =
    "frame_index,p_oi,psnr_oi,p_di,psnr_di,anomaly,normalized";

double parse_double(std::string_view s, std::size_t line_no) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(FormatFault::kMalformed,
                      "score file line " + std::to_string(line_no) +
                          ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_score_file(std::span<const FrameScore> frames,
                      const std::filesystem::path& path) {
  std::ostringstream out;
  out << kScoreHeader << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& f : frames) {
    const ScoreComponents c = f.top.value_or(ScoreComponents{nan, nan, nan, nan});
    out << f.frame_index << ',' << format_double(c.p_oi) << ','
        << format_double(c.psnr_oi) << ',' << format_double(c.p_di) << ','
        << format_double(c.psnr_di) << ',' << format_double(f.raw) << ','
        << format_double(f.normalized) << '\n';
  }
  binary::write_text_file(path, out.str());
}

std::vector<FrameScore> read_score_file(const std::filesystem::path& path) {
  std::istringstream in(binary::read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  std::vector<FrameScore> frames;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == kScoreHeader) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    while (true) {
      const auto pos = rest.find(',');
      f.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (f.size() != 7) {
      throw FormatError(FormatFault::kMalformed,
                        path.string() + ": line " + std::to_string(line_no) +
                            " needs 7 fields");
    }
    FrameScore fs;
    long frame = 0;
    auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), frame);
    if (ec != std::errc() || ptr != f[0].data() + f[0].size()) {
      throw FormatError(FormatFault::kMalformed,
                        path.string() + ": line " + std::to_string(line_no) +
                            ": bad frame index");
    }
    fs.frame_index = frame;
    ScoreComponents c{parse_double(f[1], line_no), parse_double(f[2], line_no),
                      parse_double(f[3], line_no), parse_double(f[4], line_no)};
    if (!std::isnan(c.p_oi)) fs.top = c;
    fs.raw = parse_double(f[5], line_no);
    fs.normalized = parse_double(f[6], line_no);
    frames.push_back(fs);
  }
  return frames;
}

void write_patch_scores(std::span<const ScoreRecord> records,
                        const std::filesystem::path& path) {
  std::ostringstream out;
  out << "frame_index,sequence_id,p_oi,psnr_oi,p_di,psnr_di,anomaly\n";
  for (const auto& r : records) {
    out << r.frame_index << ',' << r.sequence_id << ',' << format_double(r.c.p_oi)
        << ',' << format_double(r.c.psnr_oi) << ',' << format_double(r.c.p_di)
        << ',' << format_double(r.c.psnr_di) << ',' << format_double(r.anomaly)
        << '\n';
  }
  binary::write_text_file(path, out.str());
}

}  // namespace gmmdae
