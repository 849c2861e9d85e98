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

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "iqa/imgcore.hpp"

namespace iqa {

// One block's activations, stored height x width x channels (channel fastest).
struct ActivationBlock {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  void validate() const;
};

// Per-channel spatial mean, accumulated in double.
std::vector<float> gap_pool(const ActivationBlock& block);

// gap_pool of each block, concatenated in order.
std::vector<float> mlsp_concat(std::span<const ActivationBlock> blocks);

// Output channels of the 43 blocks pooled by the reference backbone.
std::span<const int> canonical_mlsp_schedule();
inline constexpr int kCanonicalMlspDim = 16928;

class FeatureStore {
 public:
  explicit FeatureStore(int dim = 1);

  int dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> row(std::size_t i) const;
  std::optional<std::size_t> find(const std::string& id) const;
  void add(std::string id, std::span<const float> values);

  bool operator==(const FeatureStore& other) const;

 private:
  int dim_;
  std::vector<std::string> ids_;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// MLSP file: "MLSP", u32 version (1), u32 count, u32 dim, then per record a
// u16 id length, the UTF-8 id and dim float32 values. Little-endian.
void write_store(const FeatureStore& store, const std::filesystem::path& path);
FeatureStore read_store(const std::filesystem::path& path);

// Directory of <stem>.json shape sidecars, each next to a raw little-endian
// float32 tensor file. Sidecar keys: "blocks" (list of {"shape": [h, w, c]}),
// optional "image_id" (default: stem), "file" (default: <stem>.f32) and
// "layout" ("hwc" or "chw", default "hwc").
FeatureStore ingest_activation_dir(const std::filesystem::path& dir);

// Built-in multi-scale filter-bank responses (local contrast normalized
// luma statistics and chroma energy) standing in for CNN activations.
// One block per scale.
std::vector<ActivationBlock> filterbank_activations(const ImageBuffer& rgb);
inline constexpr int kFilterbankScales = 4;
inline constexpr int kFilterbankChannels = 20;

// Per-dimension standardization fitted on training rows.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static FeatureScaler fit(const FeatureStore& store, std::span<const std::size_t> rows);
  std::vector<double> apply(std::span<const float> x) const;
  std::string to_json() const;
  static FeatureScaler from_json(const std::string& text);
};

}  // namespace iqa
