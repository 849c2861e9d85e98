// Copyright 2026 The weakiqa Authors
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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iqa/error.hpp"
#include "json.hpp"

// Pipeline stages driven by JSON configs. Each stage reads and writes only
// declared files and records its resolved config next to every artifact.
namespace iqa::pipeline {

using Json = nlohmann::ordered_json;

struct CommandResult {
  Json body;
  // Set when the stage ran to completion but did not succeed: selftest
  // checks failing (kValidation) or records that could not be produced
  // (kRuntime). `message` summarizes.
  std::optional<ErrorCode> failure;
  std::string message;
};

// Commands: synth, distort, score, normalize, features, train-mtl,
// train-regressor, evaluate, reliability, selftest. A config key
// "dry_run": true describes the work without touching the filesystem.
CommandResult run_command(std::string_view command, const Json& config);

std::vector<std::string> command_names();

// 0 = quiet (errors only), 1 = info, 2 = debug.
void set_verbosity(int level);

// Default worker count: IQA_WORKERS when set, else the hardware concurrency.
int default_workers();

}  // namespace iqa::pipeline
