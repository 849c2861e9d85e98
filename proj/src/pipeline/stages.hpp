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

#include "common.hpp"

namespace iqa::pipeline {

CommandResult cmd_synth(const Json& raw);
CommandResult cmd_distort(const Json& raw);
CommandResult cmd_score(const Json& raw);
CommandResult cmd_normalize(const Json& raw);
CommandResult cmd_features(const Json& raw);
CommandResult cmd_train_mtl(const Json& raw);
CommandResult cmd_train_regressor(const Json& raw);
CommandResult cmd_evaluate(const Json& raw);
CommandResult cmd_reliability(const Json& raw);
CommandResult cmd_selftest(const Json& raw);

// Score CSV plus its polarity sidecar (<stem>.polarity.json).
ScoreTable load_scores(const fs::path& path);
void save_scores(const ScoreTable& table, const fs::path& path);

}  // namespace iqa::pipeline
