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

#include <functional>
#include <utility>

#include "common.hpp"
#include "stages.hpp"

namespace iqa::pipeline {

namespace {

using Stage = CommandResult (*)(const Json&);

const std::vector<std::pair<std::string, Stage>>& stages() {
  static const std::vector<std::pair<std::string, Stage>> table = {
      {"synth", cmd_synth},
      {"distort", cmd_distort},
      {"score", cmd_score},
      {"normalize", cmd_normalize},
      {"features", cmd_features},
      {"train-mtl", cmd_train_mtl},
      {"train-regressor", cmd_train_regressor},
      {"evaluate", cmd_evaluate},
      {"reliability", cmd_reliability},
      {"selftest", cmd_selftest},
  };
  return table;
}

}  // namespace

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : stages()) out.push_back(name);
  return out;
}

CommandResult run_command(std::string_view command, const Json& config) {
  if (!config.is_object()) fail(ErrorCode::kValidation, "config must be a JSON object");
  for (const auto& [name, fn] : stages())
    if (name == command) {
      log().debug("{}: config {}", name, config.dump());
      return fn(config);
    }
  std::string known;
  for (const auto& n : command_names()) known += (known.empty() ? "" : ", ") + n;
  fail(ErrorCode::kValidation, "unknown command '" + std::string(command) + "' (known: " + known + ")");
}

}  // namespace iqa::pipeline
