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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <spdlog/logger.h>

#include "iqa/distortion.hpp"
#include "iqa/evalstat.hpp"
#include "iqa/features.hpp"
#include "iqa/friqa.hpp"
#include "iqa/neuro.hpp"
#include "iqa/pipeline.hpp"

namespace iqa::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kToolName = "weakiqa";
inline constexpr const char* kToolVersion = "0.1.0";

spdlog::logger& log();

// Typed access to one stage's config object; unknown keys are rejected.
class Config {
 public:
  Config(std::string command, const Json& raw, std::set<std::string> allowed);

  const std::string& command() const { return command_; }
  bool has(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string required_str(const std::string& key) const;
  fs::path required_path(const std::string& key) const;
  // Must exist when the stage starts.
  fs::path input_path(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::uint64_t seed(const std::string& key = "seed", std::uint64_t fallback = 0) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& fallback) const;
  int workers() const;
  bool dry_run() const { return flag("dry_run", false); }

  // The config with defaults filled in, recorded in provenance.
  Json& resolved() const { return resolved_; }

 private:
  const Json* find(const std::string& key) const;
  [[noreturn]] void type_error(const std::string& key, const char* expected) const;

  std::string command_;
  Json raw_;
  mutable Json resolved_;
};

// Writes <artifact>.meta.json with the tool, command, resolved config, seed
// and fingerprints of the declared inputs.
void write_provenance(const fs::path& artifact, const Config& cfg, const std::map<std::string, fs::path>& inputs,
                      const Json& extra = Json::object());

std::string fingerprint(const fs::path& path);

void write_json(const fs::path& path, const Json& doc);
Json read_json(const fs::path& path);
void ensure_parent(const fs::path& path);

// image id -> reference id, from a manifest (reference id = ref file stem).
std::map<std::string, std::string> reference_map(const DatasetManifest& manifest);

// Splits either read from cfg["splits"] (CSV reference_id,split) or drawn
// from the manifest references with cfg["seed"] and cfg["ratios"].
eval::SplitAssignment load_or_make_splits(const Config& cfg, const DatasetManifest& manifest);
void write_splits_csv(const eval::SplitAssignment& splits, const fs::path& path);
eval::SplitAssignment read_splits_csv(const fs::path& path);
eval::SplitRatios ratios_from(const Config& cfg);

// Rows of a labelled feature set grouped by split.
struct LabelledSet {
  std::vector<std::string> ids;
  std::vector<std::string> tasks;
  std::vector<std::size_t> feature_rows;  // index into the store
  std::vector<std::vector<double>> labels;  // [row][task]
  std::vector<eval::Split> split;
};

// Joins label rows with features and the split assignment. Every label id
// must have a feature vector and a reference.
LabelledSet join_labels(const FeatureStore& store, const ScoreTable& labels, const std::vector<std::string>& tasks,
                        const std::map<std::string, std::string>& ref_of, const eval::SplitAssignment& splits);

std::vector<std::size_t> rows_in(const LabelledSet& set, eval::Split split);

nn::TrainData make_train_data(const LabelledSet& set, const FeatureStore& store, const FeatureScaler& scaler,
                              std::span<const std::size_t> rows);

nn::TrainConfig train_config_from(const Config& cfg, nn::LossKind default_loss, double default_lr);
Json to_json(const nn::TrainConfig& c);

}  // namespace iqa::pipeline
