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

#include <cstddef>
#include <vector>

#include "gmmdae/tensor.hpp"

namespace gmmdae {

struct RankPoolConfig {
  std::size_t t = 10;  // window length (time stride)
};

struct DynamicImage {
  Tensor image;
  long frame_index = 0;
};

/// Weight of patch x^i in the approximate rank-pooled dynamic image:
///   alpha_i(t) = sum_{j=i}^{t} (2j - t - 1) / j,   i = 1..t.
/// Returned zero-based: result[i-1] == alpha_i. The weights sum to zero.
std::vector<double> rank_pool_coefficients(std::size_t t);

/// d = sum_i alpha_i(t) x^i in double precision, flattened row-major.
/// The sequence must hold exactly cfg.t patches of one shape.
std::vector<double> rank_pool(const PatchSequence& seq, const RankPoolConfig& cfg);

/// rank_pool() stored as a float tensor of the patch shape.
DynamicImage dynamic_image(const PatchSequence& seq, const RankPoolConfig& cfg);

}  // namespace gmmdae
