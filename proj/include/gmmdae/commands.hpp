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

#include <ostream>
#include <string>

#include "gmmdae/config.hpp"
#include "gmmdae/error.hpp"

namespace gmmdae {

/// Process exit statuses of the pipeline commands.
enum ExitStatus : int {
  kExitOk = 0,
  kExitConfig = 2,        // configuration or validation failure
  kExitIo = 3,            // unreadable or unwritable files
  kExitNumerical = 4,     // NaN loss, singular covariance, ...
  kExitIncompatible = 5,  // DAE bottleneck / mixture dimension mismatch
};

int exit_status_for(const Error& e);

// Each command reports progress on `out`, failures on `err`, and returns an
// ExitStatus. Identical configs produce byte-identical output files.
int cmd_synth(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_train(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_fit(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_score(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);

/// Dispatches by subcommand name; unknown names yield kExitConfig.
int run_command(const std::string& name, const PipelineConfig& cfg,
                std::ostream& out, std::ostream& err);

}  // namespace gmmdae
