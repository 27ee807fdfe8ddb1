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

#include "gmmdae/tensorio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "gmmdae/binary_io.hpp"
#include "gmmdae/error.hpp"

namespace gmmdae {

// ---------------------------------------------------------------------------
// Tensor

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw InvalidArgument("tensor shape must have rank >= 1");
  for (std::size_t d : shape) {
    if (d == 0) {
      throw InvalidArgument("tensor dimensions must be positive: " +
                            shape_to_string(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), 0.0F);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (shape_size(shape_) != data_.size()) {
    throw InvalidArgument("shape " + shape_to_string(shape_) + " needs " +
                          std::to_string(shape_size(shape_)) +
                          " values, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::slice(std::size_t index) const {
  if (rank() < 2) throw InvalidArgument("slice needs a tensor of rank >= 2");
  if (index >= shape_[0]) throw InvalidArgument("slice index out of range");
  Shape sub(shape_.begin() + 1, shape_.end());
  const std::size_t n = shape_size(sub);
  auto first = data_.begin() + static_cast<std::ptrdiff_t>(index * n);
  return Tensor(std::move(sub),
                std::vector<float>(first, first + static_cast<std::ptrdiff_t>(n)));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// File helpers

namespace binary {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace binary

// ---------------------------------------------------------------------------
// GDT1

namespace {
constexpr std::string_view kTensorMagic = "GDT1";
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.rank() == 0 || t.rank() > 255) {
    throw InvalidArgument("GDT1 supports ranks 1..255");
  }
  binary::Writer w;
  w.magic(kTensorMagic);
  w.u8(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > 0xFFFFFFFFULL) throw InvalidArgument("dimension exceeds u32");
    w.u32(static_cast<std::uint32_t>(d));
  }
  for (float v : t.data()) w.f32(v);
  return w.release();
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes, "GDT1 tensor");
  r.expect_magic(kTensorMagic);
  const std::size_t rank = r.u8();
  if (rank == 0) {
    throw FormatError(FormatFault::kMalformed, "GDT1 tensor: rank 0");
  }
  Shape shape(rank);
  for (auto& d : shape) {
    d = r.u32();
    if (d == 0) {
      throw FormatError(FormatFault::kMalformed, "GDT1 tensor: zero dimension");
    }
  }
  const std::size_t count = shape_size(shape);
  if (r.remaining() != count * 4) {
    throw FormatError(FormatFault::kShapeMismatch,
                      "GDT1 tensor: shape " + shape_to_string(shape) +
                          " needs " + std::to_string(count * 4) +
                          " payload bytes, found " +
                          std::to_string(r.remaining()));
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = r.f32();
    if (!std::isfinite(data[i])) {
      throw FormatError(FormatFault::kNonFinite,
                        "GDT1 tensor: non-finite value at element " +
                            std::to_string(i));
    }
  }
  return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  binary::write_file(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = binary::read_file(path);
  try {
    return decode_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.fault(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Resampling

Tensor resize_bilinear(const Tensor& img, std::size_t out_h, std::size_t out_w) {
  if (img.rank() != 2) {
    throw InvalidArgument("resize_bilinear needs a 2-D tensor, got shape " +
                          shape_to_string(img.shape()));
  }
  if (out_h == 0 || out_w == 0) {
    throw InvalidArgument("resize_bilinear output size must be positive");
  }
  const std::size_t in_h = img.dim(0);
  const std::size_t in_w = img.dim(1);
  if (in_h == out_h && in_w == out_w) return img;

  auto sample_axis = [](std::size_t out, std::size_t in, std::size_t i,
                        std::size_t& lo, std::size_t& hi, double& frac) {
    const double pos =
        out > 1 ? static_cast<double>(i) * static_cast<double>(in - 1) /
                      static_cast<double>(out - 1)
                : 0.0;
    lo = std::min(static_cast<std::size_t>(pos), in - 1);
    hi = std::min(lo + 1, in - 1);
    frac = pos - static_cast<double>(lo);
  };

  Tensor out({out_h, out_w});
  for (std::size_t y = 0; y < out_h; ++y) {
    std::size_t y0, y1;
    double fy;
    sample_axis(out_h, in_h, y, y0, y1, fy);
    for (std::size_t x = 0; x < out_w; ++x) {
      std::size_t x0, x1;
      double fx;
      sample_axis(out_w, in_w, x, x0, x1, fx);
      const double top = (1.0 - fx) * img.at(y0, x0) + fx * img.at(y0, x1);
      const double bottom = (1.0 - fx) * img.at(y1, x0) + fx * img.at(y1, x1);
      out.at(y, x) = static_cast<float>((1.0 - fy) * top + fy * bottom);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_int(std::string_view s, T& value) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

CorpusManifest parse_manifest(const std::string& text,
                              const std::filesystem::path& base_dir) {
  CorpusManifest manifest;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    auto fail = [&](const std::string& why) {
      throw FormatError(FormatFault::kMalformed,
                        "manifest line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 3 && fields.size() != 4) {
      fail("expected sequence_id,path,frame_index[,label]");
    }
    ManifestEntry e;
    e.sequence_id = std::string(fields[0]);
    if (e.sequence_id.empty()) fail("empty sequence_id");
    if (fields[1].empty()) fail("empty path");
    std::filesystem::path p{std::string(fields[1])};
    e.path = p.is_absolute() ? p : base_dir / p;
    if (!parse_int(fields[2], e.frame_index) || e.frame_index < 0) {
      fail("frame_index must be a non-negative integer");
    }
    if (fields.size() == 4) {
      int label = 0;
      if (!parse_int(fields[3], label) || (label != 0 && label != 1)) {
        fail("label must be 0 or 1");
      }
      e.label = label;
    }
    if (!manifest.entries.empty() &&
        manifest.entries.front().label.has_value() != e.label.has_value()) {
      fail("labels must be present for all entries or for none");
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(binary::read_text_file(path), path.parent_path());
}

void write_manifest(const CorpusManifest& manifest,
                    const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# sequence_id,path,frame_index[,label]\n";
  const auto base = path.parent_path();
  for (const auto& e : manifest.entries) {
    auto rel = e.path.is_absolute() && !base.empty()
                   ? std::filesystem::relative(e.path, base)
                   : e.path;
    out << e.sequence_id << ',' << rel.generic_string() << ',' << e.frame_index;
    if (e.label) out << ',' << *e.label;
    out << '\n';
  }
  binary::write_text_file(path, out.str());
}

std::vector<PatchSequence> load_corpus(const CorpusManifest& manifest,
                                       const LoadOptions& options) {
  std::vector<PatchSequence> corpus;
  corpus.reserve(manifest.entries.size());
  std::size_t expected_t = 0;
  for (const auto& e : manifest.entries) {
    if (!std::filesystem::exists(e.path)) {
      throw IoError("sequence " + e.sequence_id + ": missing file " +
                    e.path.string());
    }
    const Tensor stack = read_tensor(e.path);
    if (stack.rank() != 3) {
      throw FormatError(FormatFault::kMalformed,
                        "sequence " + e.sequence_id + ": expected a [t,h,w] "
                        "tensor, got shape " + shape_to_string(stack.shape()));
    }
    const std::size_t t = stack.dim(0);
    if (expected_t == 0) {
      expected_t = t;
    } else if (t != expected_t) {
      throw FormatError(FormatFault::kMalformed,
                        "sequence " + e.sequence_id + ": length " +
                            std::to_string(t) + " differs from " +
                            std::to_string(expected_t));
    }
    const bool right_size = stack.dim(1) == options.patch_size &&
                            stack.dim(2) == options.patch_size;
    if (!right_size && !options.resize) {
      throw FormatError(FormatFault::kMalformed,
                        "sequence " + e.sequence_id + ": patches are " +
                            std::to_string(stack.dim(1)) + "x" +
                            std::to_string(stack.dim(2)) + ", expected " +
                            std::to_string(options.patch_size) + "x" +
                            std::to_string(options.patch_size));
    }
    if (options.check_unit_range) {
      for (float v : stack.data()) {
        if (v < 0.0F || v > 1.0F) {
          throw FormatError(FormatFault::kMalformed,
                            "sequence " + e.sequence_id +
                                ": pixel values must lie in [0,1]");
        }
      }
    }
    PatchSequence seq;
    seq.frame_index = e.frame_index;
    seq.sequence_id = e.sequence_id;
    seq.patches.reserve(t);
    for (std::size_t i = 0; i < t; ++i) {
      Tensor patch = stack.slice(i);
      if (!right_size) {
        patch = resize_bilinear(patch, options.patch_size, options.patch_size);
      }
      seq.patches.push_back(std::move(patch));
    }
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

}  // namespace gmmdae
