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

#include "gmmdae/rankpool.hpp"

#include "gmmdae/error.hpp"

namespace gmmdae {

std::vector<double> rank_pool_coefficients(std::size_t t) {
  if (t == 0) throw InvalidArgument("rank pooling needs t >= 1");
  // Suffix sums of (2j - t - 1)/j, walking j from t down to 1.
  std::vector<double> alpha(t);
  const double td = static_cast<double>(t);
  double acc = 0.0;
  for (std::size_t j = t; j >= 1; --j) {
    const double jd = static_cast<double>(j);
    acc += (2.0 * jd - td - 1.0) / jd;
    alpha[j - 1] = acc;
  }
  return alpha;
}

std::vector<double> rank_pool(const PatchSequence& seq, const RankPoolConfig& cfg) {
  if (seq.length() != cfg.t) {
    throw InvalidArgument("sequence " + seq.sequence_id + " has " +
                          std::to_string(seq.length()) +
                          " patches, rank pooling expects t=" +
                          std::to_string(cfg.t));
  }
  const auto alpha = rank_pool_coefficients(cfg.t);
  const Shape& shape = seq.patches.front().shape();
  for (const auto& p : seq.patches) {
    if (p.shape() != shape) {
      throw InvalidArgument("sequence " + seq.sequence_id +
                            ": patch shapes differ");
    }
  }
  const std::size_t n = shape_size(shape);
  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i < cfg.t; ++i) {
    const auto px = seq.patches[i].data();
    const double a = alpha[i];
    for (std::size_t k = 0; k < n; ++k) acc[k] += a * static_cast<double>(px[k]);
  }
  return acc;
}

DynamicImage dynamic_image(const PatchSequence& seq, const RankPoolConfig& cfg) {
  const std::vector<double> acc = rank_pool(seq, cfg);
  std::vector<float> out(acc.begin(), acc.end());
  return {Tensor(seq.patches.front().shape(), std::move(out)), seq.frame_index};
}

}  // namespace gmmdae
