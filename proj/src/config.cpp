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

#include "gmmdae/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "gmmdae/binary_io.hpp"
#include "gmmdae/error.hpp"

namespace gmmdae {

namespace fs = std::filesystem;

std::filesystem::path PipelineConfig::resolve(const fs::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  const fs::path root = workdir.is_absolute() ? workdir : base_dir / workdir;
  return (root / p).lexically_normal();
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " +
                    expected);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "a non-negative integer");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    bad_value(key, value, "a finite number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "a boolean");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& value, F&& item) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(item(trim(part)));
  return out;
}

std::string fmt_real(double v) { return format_double(v); }

template <typename T>
std::string join(const std::vector<T>& v, std::function<std::string(const T&)> f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += f(v[i]);
  }
  return out;
}

struct Entry {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define GMMDAE_PATH(name, member)                                              \
  Entry {                                                                      \
    name, [](PipelineConfig& c, const std::string& v) { c.member = v; },      \
        [](const PipelineConfig& c) { return c.member.generic_string(); }      \
  }
#define GMMDAE_SIZE(name, member)                                              \
  Entry {                                                                      \
    name,                                                                      \
        [](PipelineConfig& c, const std::string& v) {                          \
          c.member = parse_integer<std::size_t>(name, v);                      \
        },                                                                     \
        [](const PipelineConfig& c) { return std::to_string(c.member); }       \
  }
#define GMMDAE_REAL(name, member)                                              \
  Entry {                                                                      \
    name,                                                                      \
        [](PipelineConfig& c, const std::string& v) {                          \
          c.member = parse_real(name, v);                                      \
        },                                                                     \
        [](const PipelineConfig& c) { return fmt_real(c.member); }             \
  }
#define GMMDAE_TEXT(name, member)                                              \
  Entry {                                                                      \
    name, [](PipelineConfig& c, const std::string& v) { c.member = v; },      \
        [](const PipelineConfig& c) { return c.member; }                       \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"seed",
       [](PipelineConfig& c, const std::string& v) {
         c.seed = parse_integer<std::uint64_t>("seed", v);
       },
       [](const PipelineConfig& c) { return std::to_string(c.seed); }},
      GMMDAE_PATH("workdir", workdir),

      GMMDAE_PATH("synth.output_dir", synth.output_dir),
      GMMDAE_SIZE("synth.train_frames", synth.train_frames),
      GMMDAE_SIZE("synth.val_frames", synth.val_frames),
      GMMDAE_SIZE("synth.test_frames", synth.test_frames),
      GMMDAE_SIZE("synth.patch_size", synth.patch_size),
      GMMDAE_REAL("synth.speed_min", synth.speed_min),
      GMMDAE_REAL("synth.speed_max", synth.speed_max),
      GMMDAE_REAL("synth.fast_factor", synth.fast_factor),
      GMMDAE_REAL("synth.blob_radius", synth.blob_radius),
      GMMDAE_REAL("synth.noise_std", synth.noise_std),
      GMMDAE_SIZE("synth.segment_length", synth.segment_length),
      GMMDAE_TEXT("synth.val_anomalies", synth.val_anomalies),
      GMMDAE_TEXT("synth.test_anomalies", synth.test_anomalies),

      GMMDAE_SIZE("rankpool.t", rankpool.t),

      GMMDAE_PATH("train.manifest", train.manifest),
      {"train.encoder_dims",
       [](PipelineConfig& c, const std::string& v) {
         c.train.encoder_dims = parse_list<std::size_t>(v, [&](const std::string& s) {
           return parse_integer<std::size_t>("train.encoder_dims", s);
         });
       },
       [](const PipelineConfig& c) {
         return join<std::size_t>(c.train.encoder_dims,
                                  [](const std::size_t& d) { return std::to_string(d); });
       }},
      GMMDAE_REAL("train.sigma", train.params.sigma),
      GMMDAE_REAL("train.beta", train.params.beta),
      GMMDAE_REAL("train.learning_rate", train.params.learning_rate),
      GMMDAE_REAL("train.lr_decay", train.params.lr_decay),
      GMMDAE_SIZE("train.batch_size", train.params.batch_size),
      GMMDAE_SIZE("train.max_epochs", train.params.max_epochs),
      GMMDAE_PATH("train.appearance_model", train.appearance_model),
      GMMDAE_PATH("train.motion_model", train.motion_model),
      GMMDAE_PATH("train.appearance_loss_log", train.appearance_loss_log),
      GMMDAE_PATH("train.motion_loss_log", train.motion_loss_log),

      GMMDAE_SIZE("fit.k", fit.params.k),
      GMMDAE_REAL("fit.epsilon", fit.params.epsilon),
      GMMDAE_SIZE("fit.max_iters", fit.params.max_iters),
      GMMDAE_REAL("fit.cov_reg", fit.params.cov_reg),
      GMMDAE_PATH("fit.appearance_gmm", fit.appearance_gmm),
      GMMDAE_PATH("fit.motion_gmm", fit.motion_gmm),
      GMMDAE_PATH("fit.log", fit.log),

      GMMDAE_PATH("score.manifest", score.manifest),
      GMMDAE_PATH("score.output", score.output),
      GMMDAE_PATH("score.patch_output", score.patch_output),
      GMMDAE_SIZE("score.frame_count", score.frame_count),
      GMMDAE_REAL("score.lambda1", score.lambdas[0]),
      GMMDAE_REAL("score.lambda2", score.lambdas[1]),
      GMMDAE_REAL("score.lambda3", score.lambdas[2]),
      GMMDAE_REAL("score.lambda4", score.lambdas[3]),

      GMMDAE_PATH("eval.scores", eval.scores),
      GMMDAE_PATH("eval.labels", eval.labels),
      GMMDAE_PATH("eval.report", eval.report),
      {"eval.grid",
       [](PipelineConfig& c, const std::string& v) {
         c.eval.grid = parse_bool("eval.grid", v);
       },
       [](const PipelineConfig& c) { return std::string(c.eval.grid ? "true" : "false"); }},
      {"eval.grid_values",
       [](PipelineConfig& c, const std::string& v) {
         c.eval.grid_values = parse_list<double>(v, [](const std::string& s) {
           return parse_real("eval.grid_values", s);
         });
       },
       [](const PipelineConfig& c) {
         return join<double>(c.eval.grid_values, [](const double& d) { return fmt_real(d); });
       }},
      GMMDAE_PATH("eval.validation_scores", eval.validation_scores),
      GMMDAE_PATH("eval.validation_labels", eval.validation_labels),
  };
  return table;
}

#undef GMMDAE_PATH
#undef GMMDAE_SIZE
#undef GMMDAE_REAL
#undef GMMDAE_TEXT

}  // namespace

void set_config_value(PipelineConfig& cfg, const std::string& key,
                      const std::string& value) {
  for (const auto& e : entries()) {
    if (e.key == key) {
      e.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_override(PipelineConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  set_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir) {
  PipelineConfig cfg;
  cfg.base_dir = base_dir.empty() ? fs::path(".") : base_dir;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  const std::string text = binary::read_text_file(path);
  return parse_config(text, fs::absolute(path).parent_path());
}

std::string format_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) out += e.key + " = " + e.get(cfg) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.push_back(e.key);
  return keys;
}

}  // namespace gmmdae
