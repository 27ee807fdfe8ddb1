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

#include "gmmdae/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "gmmdae/binary_io.hpp"
#include "gmmdae/error.hpp"

namespace gmmdae {

void LabeledScores::validate() const {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("scores and labels differ in length");
  }
  bool pos = false;
  bool neg = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidArgument("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw InvalidArgument("scores must be finite");
    pos = pos || labels[i] == 1;
    neg = neg || labels[i] == 0;
  }
  if (!pos || !neg) {
    throw InvalidArgument("AUROC needs both normal and abnormal labels");
  }
}

namespace {

std::vector<std::size_t> descending_order(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double auroc(const LabeledScores& ls) {
  ls.validate();
  const std::size_t n = ls.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ls.scores[a] < ls.scores[b];
  });
  // Rank sum of positives with midranks over tie groups (ranks are 1-based).
  double pos_rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && ls.scores[order[j]] == ls.scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t q = i; q < j; ++q) {
      if (ls.labels[order[q]] == 1) {
        pos_rank_sum += midrank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<RocPoint> roc_curve(const LabeledScores& ls) {
  ls.validate();
  const auto order = descending_order(ls.scores);
  double total_pos = 0.0;
  for (int l : ls.labels) total_pos += l;
  const double total_neg = static_cast<double>(ls.labels.size()) - total_pos;

  std::vector<RocPoint> curve{{0.0, 0.0}};
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && ls.scores[order[j]] == ls.scores[order[i]]) {
      if (ls.labels[order[j]] == 1) tp += 1.0;
      else fp += 1.0;
      ++j;
    }
    curve.push_back({fp / total_neg, tp / total_pos});
    i = j;
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
  }
  return area;
}

GridSpec GridSpec::uniform(std::vector<double> candidates) {
  GridSpec g;
  g.values.fill(candidates);
  return g;
}

GridSpec GridSpec::default_grid() { return uniform({0.0, 0.25, 0.5, 1.0, 2.0, 4.0}); }

void GridSpec::validate() const {
  for (const auto& list : values) {
    if (list.empty()) throw InvalidArgument("every grid axis needs a candidate");
    for (double v : list) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidArgument("grid values must be finite and non-negative");
      }
    }
  }
  const bool any_positive = std::any_of(values.begin(), values.end(), [](const auto& list) {
    return std::any_of(list.begin(), list.end(), [](double v) { return v > 0.0; });
  });
  if (!any_positive) throw InvalidArgument("grid holds no point with a positive weight");
}

double frame_auroc(std::span<const FrameScore> frames,
                   std::span<const FrameLabel> labels) {
  std::map<long, double> by_frame;
  for (const auto& f : frames) by_frame[f.frame_index] = f.normalized;
  LabeledScores ls;
  std::map<long, int> seen;
  for (const auto& [frame, label] : labels) {
    auto it = by_frame.find(frame);
    if (it == by_frame.end()) {
      throw InvalidArgument("labeled frame " + std::to_string(frame) + " has no score");
    }
    seen[frame] = label;
    ls.scores.push_back(it->second);
    ls.labels.push_back(label);
  }
  for (const auto& [frame, score] : by_frame) {
    if (!seen.contains(frame)) {
      throw InvalidArgument("scored frame " + std::to_string(frame) + " has no label");
    }
  }
  return auroc(ls);
}

GridResult grid_search(std::span<const ScoreRecord> components,
                       std::span<const FrameLabel> labels, const GridSpec& grid) {
  grid.validate();
  std::vector<long> frames;
  frames.reserve(labels.size());
  for (const auto& [frame, label] : labels) frames.push_back(frame);

  std::vector<ScoreRecord> fused(components.begin(), components.end());
  GridResult best;
  bool have_best = false;
  for (double l1 : grid.values[0]) {
    for (double l2 : grid.values[1]) {
      for (double l3 : grid.values[2]) {
        for (double l4 : grid.values[3]) {
          if (l1 == 0.0 && l2 == 0.0 && l3 == 0.0 && l4 == 0.0) continue;
          const FusionWeights w(l1, l2, l3, l4);
          for (auto& r : fused) r.anomaly = fuse(r.c, w);
          const double a = frame_auroc(aggregate_frames(fused, frames), labels);
          ++best.evaluated;
          if (!have_best || a > best.auroc) {
            best.weights = w;
            best.auroc = a;
            have_best = true;
          }
        }
      }
    }
  }
  if (!have_best) throw InvalidArgument("grid contains only the all-zero point");
  return best;
}

std::vector<FrameLabel> read_labels(const std::filesystem::path& path) {
  std::istringstream in(binary::read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  std::vector<FrameLabel> labels;
  std::set<long> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    long frame = -1;
    int label = -1;
    bool ok = comma != std::string::npos;
    if (ok) {
      auto r1 = std::from_chars(line.data(), line.data() + comma, frame);
      auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), label);
      ok = r1.ec == std::errc() && r1.ptr == line.data() + comma &&
           r2.ec == std::errc() && r2.ptr == line.data() + line.size() &&
           frame >= 0 && (label == 0 || label == 1);
    }
    if (!ok) {
      throw FormatError(FormatFault::kMalformed,
                        path.string() + ": line " + std::to_string(line_no) +
                            " must be frame_index,label with label 0 or 1");
    }
    if (!seen.insert(frame).second) {
      throw FormatError(FormatFault::kMalformed,
                        path.string() + ": line " + std::to_string(line_no) +
                            " repeats frame " + std::to_string(frame));
    }
    labels.emplace_back(frame, label);
  }
  return labels;
}

void write_labels(std::span<const FrameLabel> labels,
                  const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& [frame, label] : labels) out << frame << ',' << label << '\n';
  binary::write_text_file(path, out.str());
}

}  // namespace gmmdae
