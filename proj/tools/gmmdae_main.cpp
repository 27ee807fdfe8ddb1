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

// Command-line driver: gmmdae <synth|train|fit|score|eval|config> [options]

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gmmdae/commands.hpp"
#include "gmmdae/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Video anomaly detection with denoising autoencoders and "
               "Gaussian mixture latent densities"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "Configuration file (key = value lines)");
  app.add_option("--set", overrides, "Override a config key: --set key=value")
      ->allow_extra_args(false);

  const char* commands[][2] = {
      {"synth", "Generate the synthetic train/val/test corpora"},
      {"train", "Train the appearance and motion autoencoders"},
      {"fit", "Fit latent Gaussian mixtures for both pipelines"},
      {"score", "Score a manifest and write per-frame anomaly scores"},
      {"eval", "Frame-level AUROC (optionally grid-search fusion weights)"},
      {"config", "Print the effective configuration"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gmmdae::kExitConfig;
  }

  gmmdae::PipelineConfig cfg;
  try {
    cfg = config_path.empty() ? gmmdae::parse_config("", std::filesystem::current_path())
                              : gmmdae::load_config(config_path);
    for (const auto& o : overrides) gmmdae::apply_override(cfg, o);
  } catch (const gmmdae::IoError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return gmmdae::kExitIo;
  } catch (const gmmdae::Error& e) {
    std::cerr << "config: " << e.what() << '\n';
    return gmmdae::kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "config") {
    std::cout << gmmdae::format_config(cfg);
    return gmmdae::kExitOk;
  }
  return gmmdae::run_command(name, cfg, std::cout, std::cerr);
}
