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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gmmdae {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array of 32-bit floats. Shape and data length always
/// agree; every dimension is positive.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  float operator[](std::size_t i) const { return data_[i]; }
  float& operator[](std::size_t i) { return data_[i]; }

  /// 2-D element access; the tensor must be rank 2.
  float at(std::size_t row, std::size_t col) const {
    return data_[row * shape_[1] + col];
  }
  float& at(std::size_t row, std::size_t col) {
    return data_[row * shape_[1] + col];
  }

  /// Slice along the leading axis: returns the sub-tensor at `index`.
  Tensor slice(std::size_t index) const;

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Window of consecutive patches cropped with the bounding box of one object
/// in the current frame. patches.back() is the current-frame patch.
struct PatchSequence {
  std::vector<Tensor> patches;
  long frame_index = 0;
  std::string sequence_id;

  std::size_t length() const noexcept { return patches.size(); }
  const Tensor& current() const { return patches.back(); }
};

struct ManifestEntry {
  std::string sequence_id;
  std::filesystem::path path;
  long frame_index = 0;
  std::optional<int> label;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
};

}  // namespace gmmdae
