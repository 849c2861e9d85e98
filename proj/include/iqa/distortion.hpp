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
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iqa/imgcore.hpp"
#include "json.hpp"

// The 25 synthetic degradations at five levels each, the two dataset plans
// (full factorial and randomized) and the batch runner that materializes them.
namespace iqa {

enum class DistortionKind : int {
  kGaussianBlur = 1,
  kLensBlur,
  kMotionBlur,
  kColorDiffusion,
  kColorShift,
  kColorQuantization,
  kColorSaturation1,
  kColorSaturation2,
  kJpeg2000,
  kJpeg,
  kWhiteNoise,
  kWhiteNoiseColor,
  kImpulseNoise,
  kMultiplicativeNoise,
  kDenoise,
  kBrighten,
  kDarken,
  kMeanShift,
  kJitter,
  kNonEccentricityPatch,
  kPixelate,
  kQuantization,
  kColorBlock,
  kHighSharpen,
  kContrastChange,
};

inline constexpr int kNumDistortionKinds = 25;
inline constexpr int kNumLevels = 5;

inline int ordinal(DistortionKind kind) { return static_cast<int>(kind); }
DistortionKind kind_from_ordinal(int ordinal);
std::string_view kind_name(DistortionKind kind);
DistortionKind kind_from_name(std::string_view name);
std::array<DistortionKind, kNumDistortionKinds> all_kinds();

struct DistortionSpec {
  DistortionKind kind = DistortionKind::kGaussianBlur;
  int level = 1;  // 1 (mild) .. 5 (severe)
  std::uint64_t seed = 0;
};

void validate(const DistortionSpec& spec);

struct KindParams {
  std::string parameter;            // name of the severity-driving value
  std::array<double, kNumLevels> levels{};
  std::map<std::string, double> extras;  // level-independent settings
  bool enabled = true;
};

// Per-(kind, level) parameters. Every ladder must be strictly monotone.
class DistortionParamTable {
 public:
  static DistortionParamTable defaults();
  // Starts from defaults() and overrides whatever the document names, e.g.
  // {"gaussian_blur": {"levels": [1,2,3,4,5]}, "jpeg2000": {"enabled": false}}.
  static DistortionParamTable from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  const KindParams& at(DistortionKind kind) const { return kinds_[ordinal(kind) - 1]; }
  KindParams& at(DistortionKind kind) { return kinds_[ordinal(kind) - 1]; }

  double value(DistortionKind kind, int level) const;
  double extra(DistortionKind kind, const std::string& name) const;
  std::vector<DistortionKind> enabled_kinds() const;

  void validate() const;

 private:
  std::array<KindParams, kNumDistortionKinds> kinds_;
};

// Applies one degradation. Pure in (pixels, spec, table); all randomness comes
// from a generator seeded by spec.seed. Output dims equal input dims and all
// samples stay in [0,1]. Degenerate inputs (e.g. Otsu quantization of a
// constant image) return the input and append a note to `warnings`.
ImageBuffer apply_distortion(const ImageBuffer& img, const DistortionSpec& spec,
                             const DistortionParamTable& table = DistortionParamTable::defaults(),
                             std::vector<std::string>* warnings = nullptr);

// Codec round-trips used by the compression kinds.
ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality);
ImageBuffer jpeg2000_roundtrip(const ImageBuffer& img, double compression_ratio);

// Multi-level Otsu thresholds over a 256-bin histogram of `values` in [0,1].
// Returns at most `count` thresholds (fewer when the histogram has fewer
// occupied bins); values are bin edges in [0,1].
std::vector<double> otsu_thresholds(std::span<const double> values, int count);

// Procedural test image (gradients, shapes, gratings and fine texture).
ImageBuffer synthetic_reference(int width, int height, std::uint64_t seed);

// ---- dataset plans ---------------------------------------------------------

struct ManifestRecord {
  std::string image_id;
  std::string ref_path;
  std::string dist_path;
  DistortionKind kind = DistortionKind::kGaussianBlur;
  int level = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  // Throws ErrorCode::kValidation on duplicate image ids.
  void validate() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Where plan paths point. Paths are `dir / (id + ".png")`; empty dirs give bare file names.
struct PlanLayout {
  std::filesystem::path ref_dir;
  std::filesystem::path out_dir;
};

std::uint64_t record_seed(std::string_view ref_id, DistortionKind kind, int level);

// Every enabled (kind, level) for every reference.
DatasetManifest generate_kadid_plan(std::span<const std::string> ref_ids, const PlanLayout& layout = {},
                                    const DistortionParamTable& table = DistortionParamTable::defaults());

// Five records per reference with kind and level drawn uniformly.
DatasetManifest generate_kadis_plan(std::span<const std::string> ref_ids, std::uint64_t rng_seed,
                                    const PlanLayout& layout = {},
                                    const DistortionParamTable& table = DistortionParamTable::defaults());

inline constexpr int kKadisVersionsPerReference = 5;

// CSV with header image_id,ref_path,dist_path,kind,level,seed (kind as 1..25).
void write_manifest_csv(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest_csv(const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path ref_dir;  // base for relative ref_path values
  std::filesystem::path out_dir;  // base for relative dist_path values
  int workers = 1;
  bool skip_existing = false;
  // Bring references to 512x384 with resize_and_crop before distorting.
  bool preprocess = true;
  DistortionParamTable table = DistortionParamTable::defaults();
};

struct RecordFailure {
  std::string image_id;
  std::string message;
};

struct CompletionReport {
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::vector<RecordFailure> failures;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return failures.empty(); }
};

// Materializes every record as a PNG. Per-record failures are collected,
// never fatal; results do not depend on the worker count.
CompletionReport run_manifest(const DatasetManifest& manifest, const RunOptions& options);

inline constexpr int kTargetWidth = 512;
inline constexpr int kTargetHeight = 384;

}  // namespace iqa
