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

#include <string>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"

namespace iqa {

namespace {

struct KindInfo {
  std::string_view name;
  std::string_view parameter;
  std::array<double, kNumLevels> levels;
};

// Severity ladders. The original per-level constants were hand-tuned and are
// not published; these follow the same qualitative progression.
constexpr std::array<KindInfo, kNumDistortionKinds> kKinds = {{
    {"gaussian_blur", "sigma", {1, 2, 4, 6, 8}},
    {"lens_blur", "radius", {1, 2, 4, 6, 8}},
    {"motion_blur", "length", {3, 6, 10, 15, 21}},
    {"color_diffusion", "sigma", {1, 3, 6, 8, 12}},
    {"color_shift", "offset", {1, 3, 6, 8, 12}},
    {"color_quantization", "colors", {64, 32, 16, 8, 4}},
    {"color_saturation_1", "factor", {0.7, 0.5, 0.3, 0.15, 0.0}},
    {"color_saturation_2", "factor", {1.5, 2, 3, 5, 8}},
    {"jpeg2000", "ratio", {16, 32, 45, 120, 170}},
    {"jpeg", "quality", {43, 12, 7, 4, 1}},
    {"white_noise", "sigma", {0.02, 0.06, 0.10, 0.15, 0.23}},
    {"white_noise_color", "sigma", {0.02, 0.05, 0.08, 0.12, 0.18}},
    {"impulse_noise", "density", {0.01, 0.03, 0.07, 0.12, 0.20}},
    {"multiplicative_noise", "sigma", {0.03, 0.07, 0.12, 0.22, 0.35}},
    {"denoise", "sigma", {0.02, 0.04, 0.07, 0.10, 0.14}},
    {"brighten", "amplitude", {0.05, 0.10, 0.15, 0.22, 0.30}},
    {"darken", "amplitude", {0.05, 0.10, 0.15, 0.22, 0.30}},
    {"mean_shift", "shift", {0.05, 0.10, 0.15, 0.20, 0.25}},
    {"jitter", "amount", {0.5, 1, 2, 3, 4}},
    {"non_eccentricity_patch", "count", {10, 20, 40, 70, 100}},
    {"pixelate", "block", {2, 4, 8, 16, 32}},
    {"quantization", "thresholds", {15, 11, 8, 5, 3}},
    {"color_block", "count", {2, 4, 6, 8, 10}},
    {"high_sharpen", "amount", {1, 2, 3, 6, 12}},
    {"contrast_change", "gain", {3, 5, 7, 10, 14}},
}};

bool strictly_monotone(const std::array<double, kNumLevels>& v) {
  bool inc = true, dec = true;
  for (int i = 1; i < kNumLevels; ++i) {
    inc = inc && v[i] > v[i - 1];
    dec = dec && v[i] < v[i - 1];
  }
  return inc || dec;
}

}  // namespace

DistortionKind kind_from_ordinal(int ordinal) {
  if (ordinal < 1 || ordinal > kNumDistortionKinds)
    fail(ErrorCode::kInvalidArgument, "distortion kind must be 1..25, got " + std::to_string(ordinal));
  return static_cast<DistortionKind>(ordinal);
}

std::string_view kind_name(DistortionKind kind) { return kKinds[ordinal(kind) - 1].name; }

DistortionKind kind_from_name(std::string_view name) {
  for (int i = 0; i < kNumDistortionKinds; ++i)
    if (kKinds[i].name == name) return static_cast<DistortionKind>(i + 1);
  fail(ErrorCode::kInvalidArgument, "unknown distortion kind '" + std::string(name) + "'");
}

std::array<DistortionKind, kNumDistortionKinds> all_kinds() {
  std::array<DistortionKind, kNumDistortionKinds> out{};
  for (int i = 0; i < kNumDistortionKinds; ++i) out[i] = static_cast<DistortionKind>(i + 1);
  return out;
}

void validate(const DistortionSpec& spec) {
  kind_from_ordinal(ordinal(spec.kind));
  if (spec.level < 1 || spec.level > kNumLevels)
    fail(ErrorCode::kInvalidArgument, "distortion level must be 1..5, got " + std::to_string(spec.level));
}

DistortionParamTable DistortionParamTable::defaults() {
  DistortionParamTable t;
  for (int i = 0; i < kNumDistortionKinds; ++i) {
    t.kinds_[i].parameter = std::string(kKinds[i].parameter);
    t.kinds_[i].levels = kKinds[i].levels;
  }
  t.at(DistortionKind::kNonEccentricityPatch).extras = {{"patch_size", 16}, {"max_displacement", 16}};
  t.at(DistortionKind::kColorBlock).extras = {{"block_size", 32}};
  t.at(DistortionKind::kHighSharpen).extras = {{"sigma", 1.0}};
  t.at(DistortionKind::kDenoise).extras = {{"median_size", 3}};
  return t;
}

DistortionParamTable DistortionParamTable::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kValidation, "distortion parameter table must be a JSON object");
  DistortionParamTable t = defaults();
  for (const auto& [name, entry] : doc.items()) {
    const DistortionKind kind = kind_from_name(name);
    KindParams& p = t.at(kind);
    if (!entry.is_object()) fail(ErrorCode::kValidation, "entry '" + name + "' must be an object");
    if (entry.contains("levels")) {
      const auto& lv = entry.at("levels");
      if (!lv.is_array() || lv.size() != kNumLevels)
        fail(ErrorCode::kValidation, "'" + name + ".levels' must be an array of 5 numbers");
      for (int i = 0; i < kNumLevels; ++i) p.levels[i] = lv[i].get<double>();
    }
    if (entry.contains("enabled")) p.enabled = entry.at("enabled").get<bool>();
    if (entry.contains("extras"))
      for (const auto& [k, v] : entry.at("extras").items()) {
        if (!p.extras.contains(k)) fail(ErrorCode::kValidation, "'" + name + "' has no setting '" + k + "'");
        p.extras[k] = v.get<double>();
      }
  }
  t.validate();
  return t;
}

nlohmann::json DistortionParamTable::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (DistortionKind kind : all_kinds()) {
    const KindParams& p = at(kind);
    nlohmann::json e = {{"parameter", p.parameter}, {"levels", p.levels}, {"enabled", p.enabled}};
    if (!p.extras.empty()) e["extras"] = p.extras;
    doc[std::string(kind_name(kind))] = std::move(e);
  }
  return doc;
}

double DistortionParamTable::value(DistortionKind kind, int level) const {
  if (level < 1 || level > kNumLevels)
    fail(ErrorCode::kInvalidArgument, "distortion level must be 1..5, got " + std::to_string(level));
  return at(kind).levels[level - 1];
}

double DistortionParamTable::extra(DistortionKind kind, const std::string& name) const {
  const auto& ex = at(kind).extras;
  const auto it = ex.find(name);
  if (it == ex.end())
    fail(ErrorCode::kInvalidArgument, std::string(kind_name(kind)) + " has no setting '" + name + "'");
  return it->second;
}

std::vector<DistortionKind> DistortionParamTable::enabled_kinds() const {
  std::vector<DistortionKind> out;
  for (DistortionKind kind : all_kinds())
    if (at(kind).enabled) out.push_back(kind);
  return out;
}

void DistortionParamTable::validate() const {
  for (DistortionKind kind : all_kinds()) {
    if (!strictly_monotone(at(kind).levels))
      fail(ErrorCode::kValidation,
           "levels of '" + std::string(kind_name(kind)) + "' must be strictly monotone in level");
  }
  if (enabled_kinds().empty()) fail(ErrorCode::kValidation, "all distortion kinds are disabled");
}

}  // namespace iqa
