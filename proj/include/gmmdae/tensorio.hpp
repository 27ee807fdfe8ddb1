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
#include <span>
#include <vector>

#include "gmmdae/tensor.hpp"

namespace gmmdae {

// GDT1 layout: "GDT1", u8 rank, rank x u32 LE dims, prod(dims) x f32 LE.

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
/// Throws FormatError with a fault code per failure class.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

/// Bilinear resampling with corner-aligned sample positions: output pixel
/// (0,0) lands on input (0,0) and (out_h-1,out_w-1) on (h-1,w-1).
Tensor resize_bilinear(const Tensor& img, std::size_t out_h, std::size_t out_w);

/// Manifest lines: `sequence_id,path,frame_index[,label]`; `#` comments and
/// blank lines are skipped. Relative paths resolve against the manifest's
/// directory.
CorpusManifest read_manifest(const std::filesystem::path& path);
CorpusManifest parse_manifest(const std::string& text,
                              const std::filesystem::path& base_dir);
void write_manifest(const CorpusManifest& manifest,
                    const std::filesystem::path& path);

struct LoadOptions {
  std::size_t patch_size = 64;
  /// Resample patches of any other size to patch_size x patch_size instead of
  /// rejecting them.
  bool resize = false;
  /// Pixel values must lie in [0,1] (pre-normalized corpora).
  bool check_unit_range = true;
};

/// One sequence per manifest entry, in manifest order. Each file holds a
/// rank-3 tensor [t, h, w]; t must agree across the whole manifest.
std::vector<PatchSequence> load_corpus(const CorpusManifest& manifest,
                                       const LoadOptions& options = {});

}  // namespace gmmdae
