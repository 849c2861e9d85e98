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

#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iqa/distortion.hpp"
#include "iqa/imgcore.hpp"

// Full-reference metrics and the score tables that carry their outputs.
namespace iqa {

// 10 log10(1 / MSE) over all samples; identical inputs give +infinity.
double psnr(const ImageBuffer& ref, const ImageBuffer& dist);

struct SsimOptions {
  double k1 = 0.01;
  double k2 = 0.03;
  int window = 11;
  double sigma = 1.5;
};

// SSIM map over positions where the Gaussian window fits entirely inside the
// image, computed on BT.601 luma (1-channel inputs are used as they are).
ImageBuffer ssim_map(const ImageBuffer& ref, const ImageBuffer& dist, const SsimOptions& opt = {});
double ssim(const ImageBuffer& ref, const ImageBuffer& dist, const SsimOptions& opt = {});

inline constexpr std::array<double, 5> kMsSsimWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

// Five-scale MS-SSIM; requires min(width, height) >= 16 * window.
double ms_ssim(const ImageBuffer& ref, const ImageBuffer& dist, const SsimOptions& opt = {});

// Gradient magnitude similarity deviation: sample standard deviation of the
// Prewitt gradient-similarity map on 2x-downsampled luma in [0,255] with
// c = 170 and replicate borders. 0 for identical inputs, lower is better.
double gmsd(const ImageBuffer& ref, const ImageBuffer& dist);

enum class Polarity { kHigherBetter, kLowerBetter };

std::string to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

inline constexpr std::array<const char*, 4> kBuiltinMetrics = {"PSNR", "SSIM", "MSSSIM", "GMSD"};

bool is_builtin_metric(const std::string& name);
Polarity builtin_polarity(const std::string& name);
double compute_metric(const std::string& name, const ImageBuffer& ref, const ImageBuffer& dist);

// N images x K metrics, row-major, with a polarity per column.
class ScoreTable {
 public:
  ScoreTable() = default;
  ScoreTable(std::vector<std::string> image_ids, std::vector<std::string> metrics,
             std::vector<Polarity> polarity);

  std::size_t rows() const noexcept { return ids_.size(); }
  std::size_t cols() const noexcept { return metrics_.size(); }
  const std::vector<std::string>& image_ids() const noexcept { return ids_; }
  const std::vector<std::string>& metrics() const noexcept { return metrics_; }
  const std::vector<Polarity>& polarity() const noexcept { return polarity_; }

  double value(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
  void set(std::size_t row, std::size_t col, double v) { values_[row * cols() + col] = v; }

  std::size_t metric_index(const std::string& name) const;  // throws kValidation
  std::optional<std::size_t> row_index(const std::string& image_id) const;
  std::vector<double> column(std::size_t col) const;
  std::vector<double> column(const std::string& name) const { return column(metric_index(name)); }

  void add_column(const std::string& name, std::span<const double> values, Polarity polarity);
  ScoreTable select_rows(std::span<const std::size_t> rows) const;
  ScoreTable select_metrics(std::span<const std::string> names) const;

  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> metrics_;
  std::vector<Polarity> polarity_;
  std::vector<double> values_;
};

// CSV: image_id,<metric1>,...; +inf as "inf". Polarity sidecar JSON maps
// metric -> "higher" | "lower".
void write_score_csv(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable read_score_csv(const std::filesystem::path& path,
                          const std::map<std::string, Polarity>& polarity = {});
void write_polarity_json(const ScoreTable& table, const std::filesystem::path& path);
std::map<std::string, Polarity> read_polarity_json(const std::filesystem::path& path);

struct ScoreOptions {
  std::filesystem::path ref_dir;
  std::filesystem::path dist_dir;
  int workers = 1;
};

struct ScoreReport {
  ScoreTable table;
  std::vector<RecordFailure> excluded;  // rows dropped because a file was unreadable
};

// One row per readable manifest record, in manifest order regardless of workers.
ScoreReport score_dataset(const DatasetManifest& manifest, std::span<const std::string> metrics,
                          const ScoreOptions& options = {});

struct IngestReport {
  ScoreTable table;
  std::vector<std::string> missing_in_csv;    // table ids without a CSV row
  std::vector<std::string> missing_in_table;  // CSV ids not in the table
};

// Inner-joins external metric columns onto `table` by image_id. Unless
// `allow_partial` is set, any unmatched id is a validation error.
IngestReport ingest_external_scores(const std::filesystem::path& csv_path, const ScoreTable& table,
                                    bool allow_partial = false,
                                    const std::map<std::string, Polarity>& polarity = {});

}  // namespace iqa
