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

#include "gmmdae/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "gmmdae/error.hpp"
#include "gmmdae/rng.hpp"
#include "gmmdae/tensorio.hpp"

namespace gmmdae {

// ---------------------------------------------------------------------------
// Mixtures

void MixtureSpec::validate() const {
  const std::size_t k = weights.size();
  if (k == 0) throw InvalidArgument("mixture spec needs at least one component");
  if (means.size() != k || covariances.size() != k) {
    throw InvalidArgument("mixture spec lists differ in length");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (!(weights[j] >= 0.0)) throw InvalidArgument("mixture weights must be >= 0");
    total += weights[j];
    const auto d = means.front().size();
    if (d == 0 || means[j].size() != d || covariances[j].rows() != d ||
        covariances[j].cols() != d) {
      throw InvalidArgument("mixture spec dimensions disagree");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(covariances[j]);
    if (llt.info() != Eigen::Success) {
      throw InvalidArgument("covariance " + std::to_string(j) +
                            " is not positive definite");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mixture weights must sum to 1");
}

MixtureSample sample_mixture(const MixtureSpec& spec) {
  spec.validate();
  const auto d = spec.means.front().size();
  MixtureSample out{SampleMatrix(static_cast<Eigen::Index>(spec.n), d), {}};
  out.components.reserve(spec.n);

  std::vector<Eigen::MatrixXd> factors;
  for (const auto& c : spec.covariances) {
    factors.push_back(Eigen::LLT<Eigen::MatrixXd>(c).matrixL());
  }
  std::vector<double> cumulative(spec.weights.size());
  std::partial_sum(spec.weights.begin(), spec.weights.end(), cumulative.begin());

  Rng rng = make_rng(spec.seed, "synth/mixture");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd noise(d);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double r = u(rng) * cumulative.back();
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    j = std::min(j, spec.weights.size() - 1);
    for (Eigen::Index q = 0; q < d; ++q) noise(q) = g(rng);
    out.samples.row(static_cast<Eigen::Index>(i)) =
        (spec.means[j] + factors[j] * noise).transpose();
    out.components.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Video

void VideoSpec::validate() const {
  if (frames == 0) throw InvalidArgument("video needs at least one frame");
  if (t == 0) throw InvalidArgument("t must be >= 1");
  if (patch_size < 8) throw InvalidArgument("patch_size must be >= 8");
  if (!(speed_min > 0.0) || !(speed_max >= speed_min)) {
    throw InvalidArgument("speed range must satisfy 0 < speed_min <= speed_max");
  }
  if (!(fast_factor >= 4.0)) throw InvalidArgument("fast_factor must be >= 4");
  if (!(blob_radius > 0.0)) throw InvalidArgument("blob_radius must be > 0");
  if (!(noise_std >= 0.0)) throw InvalidArgument("noise_std must be >= 0");
  if (segment_length == 0) throw InvalidArgument("segment_length must be >= 1");
  for (const auto& a : anomalies) {
    if (a.first_frame < 0 || a.last_frame < a.first_frame ||
        a.last_frame >= static_cast<long>(frames)) {
      throw InvalidArgument("anomaly range " + std::to_string(a.first_frame) + "-" +
                            std::to_string(a.last_frame) + " is outside the video");
    }
  }
}

namespace {

constexpr double kBackground = 0.1;

double texture_value(Texture tex, double u, double v, double radius) {
  switch (tex) {
    case Texture::kChecker: {
      const auto cu = static_cast<long>(std::floor(u / 4.0));
      const auto cv = static_cast<long>(std::floor(v / 4.0));
      return ((cu + cv) % 2 == 0) ? 0.95 : 0.35;
    }
    case Texture::kGradient:
      return std::clamp(0.3 + 0.65 * (u + radius) / (2.0 * radius), 0.3, 0.95);
    case Texture::kStripes:
      return (static_cast<long>(std::floor(v / 3.0)) % 2 == 0) ? 0.9 : 0.3;
    case Texture::kSpots: {
      const double du = u - 6.0 * std::round(u / 6.0);
      const double dv = v - 6.0 * std::round(v / 6.0);
      return (du * du + dv * dv < 3.5) ? 1.0 : 0.25;
    }
  }
  return kBackground;
}

bool in_range(const std::vector<AnomalyInjection>& list, long frame, AnomalyType type) {
  return std::any_of(list.begin(), list.end(), [&](const AnomalyInjection& a) {
    return a.type == type && frame >= a.first_frame && frame <= a.last_frame;
  });
}

// Folds x into [lo, hi] as if it bounced off both ends.
double reflect(double x, double lo, double hi) {
  const double w = hi - lo;
  if (w <= 0.0) return lo;
  double u = std::fmod(x - lo, 2.0 * w);
  if (u < 0.0) u += 2.0 * w;
  return lo + (u <= w ? u : 2.0 * w - u);
}

struct Segment {
  Texture texture;
  double heading;
  double speed;
};

}  // namespace

SyntheticVideo render_video(const VideoSpec& spec) {
  spec.validate();
  Rng segment_rng = make_rng(spec.seed, "synth/video/segments");
  Rng pixel_rng = make_rng(spec.seed, "synth/video/pixels");
  std::uniform_int_distribution<int> pick_texture(0, 2);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> speed(spec.speed_min, spec.speed_max);
  std::uniform_real_distribution<double> jitter(-1.5, 1.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::size_t n_segments = (spec.frames + spec.segment_length - 1) / spec.segment_length;
  std::vector<Segment> segments;
  for (std::size_t s = 0; s < n_segments; ++s) {
    Segment seg;
    seg.texture = static_cast<Texture>(pick_texture(segment_rng));
    seg.heading = heading(segment_rng);
    seg.speed = speed(segment_rng);
    segments.push_back(seg);
  }

  const std::size_t p = spec.patch_size;
  const double centre = 0.5 * static_cast<double>(p);
  SyntheticVideo video;
  video.sequences.reserve(spec.frames);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const long frame = static_cast<long>(f);
    const Segment& seg = segments[f / spec.segment_length];
    const bool fast = in_range(spec.anomalies, frame, AnomalyType::kFastMotion);
    const bool novel = in_range(spec.anomalies, frame, AnomalyType::kNovelTexture);
    const Texture tex = novel ? Texture::kSpots : seg.texture;
    const double s = seg.speed * (fast ? spec.fast_factor : 1.0);
    const double vx = s * std::cos(seg.heading);
    const double vy = s * std::sin(seg.heading);
    const double cx0 = centre + jitter(pixel_rng);
    const double cy0 = centre + jitter(pixel_rng);

    PatchSequence seq;
    seq.frame_index = frame;
    char id[32];
    std::snprintf(id, sizeof(id), "f%05zu", f);
    seq.sequence_id = id;
    // The newest patch is always near the centre, whatever the speed; earlier
    // patches trail behind and bounce off the borders so fast blobs stay in
    // view for the whole window.
    const double lo = std::min(spec.blob_radius, centre);
    const double hi = static_cast<double>(p) - lo;
    for (std::size_t i = 0; i < spec.t; ++i) {
      const double offset = static_cast<double>(i) - static_cast<double>(spec.t - 1);
      const double cx = reflect(cx0 + offset * vx, lo, hi);
      const double cy = reflect(cy0 + offset * vy, lo, hi);
      Tensor patch({p, p});
      for (std::size_t y = 0; y < p; ++y) {
        for (std::size_t x = 0; x < p; ++x) {
          const double u = static_cast<double>(x) + 0.5 - cx;
          const double v = static_cast<double>(y) + 0.5 - cy;
          const double r = std::sqrt(u * u + v * v);
          const double mask = std::clamp(spec.blob_radius + 0.5 - r, 0.0, 1.0);
          double value = kBackground;
          if (mask > 0.0) {
            value += mask * (texture_value(tex, u, v, spec.blob_radius) - kBackground);
          }
          value += spec.noise_std * noise(pixel_rng);
          patch.at(y, x) = static_cast<float>(std::clamp(value, 0.0, 1.0));
        }
      }
      seq.patches.push_back(std::move(patch));
    }
    video.sequences.push_back(std::move(seq));
    video.labels.emplace_back(frame, (fast || novel) ? 1 : 0);
    video.textures.push_back(tex);
  }
  return video;
}

VideoCorpusFiles make_video_corpus(const VideoSpec& spec,
                                   const std::filesystem::path& dir,
                                   const std::string& name) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw IoError("output directory does not exist: " + dir.string());
  }
  const SyntheticVideo video = render_video(spec);
  const fs::path seq_dir = dir / name;
  std::error_code ec;
  fs::create_directory(seq_dir, ec);
  if (ec) throw IoError("cannot create " + seq_dir.string() + ": " + ec.message());

  CorpusManifest manifest;
  for (std::size_t f = 0; f < video.sequences.size(); ++f) {
    const auto& seq = video.sequences[f];
    std::vector<float> stack;
    stack.reserve(spec.t * spec.patch_size * spec.patch_size);
    for (const auto& p : seq.patches) {
      stack.insert(stack.end(), p.data().begin(), p.data().end());
    }
    const fs::path file = seq_dir / (seq.sequence_id + ".gdt");
    write_tensor(Tensor({spec.t, spec.patch_size, spec.patch_size}, std::move(stack)),
                 file);
    manifest.entries.push_back({name + "-" + seq.sequence_id,
                                fs::path(name) / (seq.sequence_id + ".gdt"),
                                seq.frame_index, video.labels[f].second});
  }
  VideoCorpusFiles out;
  out.manifest = dir / (name + "_manifest.txt");
  out.labels = dir / (name + "_labels.txt");
  out.frame_labels = video.labels;
  write_manifest(manifest, out.manifest);
  write_labels(video.labels, out.labels);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<AnomalyInjection> parse_anomalies(const std::string& text) {
  std::vector<AnomalyInjection> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    std::string_view item = rest.substr(0, semi);
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const auto dash = item.find('-', colon == std::string_view::npos ? 0 : colon);
    auto bad = [&] {
      return InvalidArgument("anomaly '" + std::string(item) +
                             "' must look like fast_motion:40-50");
    };
    if (colon == std::string_view::npos || dash == std::string_view::npos) throw bad();
    AnomalyInjection a;
    const std::string_view kind = item.substr(0, colon);
    if (kind == "fast_motion") a.type = AnomalyType::kFastMotion;
    else if (kind == "novel_texture") a.type = AnomalyType::kNovelTexture;
    else throw bad();
    const std::string_view lo = item.substr(colon + 1, dash - colon - 1);
    const std::string_view hi = item.substr(dash + 1);
    auto r1 = std::from_chars(lo.data(), lo.data() + lo.size(), a.first_frame);
    auto r2 = std::from_chars(hi.data(), hi.data() + hi.size(), a.last_frame);
    if (r1.ec != std::errc() || r1.ptr != lo.data() + lo.size() ||
        r2.ec != std::errc() || r2.ptr != hi.data() + hi.size()) {
      throw bad();
    }
    if (a.last_frame < a.first_frame) throw bad();
    out.push_back(a);
  }
  return out;
}

std::string format_anomalies(const std::vector<AnomalyInjection>& list) {
  std::string out;
  for (const auto& a : list) {
    if (!out.empty()) out += ';';
    out += a.type == AnomalyType::kFastMotion ? "fast_motion:" : "novel_texture:";
    out += std::to_string(a.first_frame) + "-" + std::to_string(a.last_frame);
  }
  return out;
}

}  // namespace gmmdae
