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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Evaluation protocol and rater reliability statistics.
namespace iqa::eval {

// Spearman correlation with midranks. Throws kDegenerate on constant input.
double srocc(std::span<const double> x, std::span<const double> y);

// Mean of DCR ratings, each in {1..5}.
double dmos(std::span<const int> ratings);

// s = b1 * (1/2 - 1 / (1 + exp(b2 (o - b3)))) + b4 o + b5
struct LogisticFit {
  std::array<double, 5> beta{};
  double residual = 0.0;  // sum of squared errors
  int iterations = 0;
  bool converged = false;

  double operator()(double objective) const;
  std::vector<double> map(std::span<const double> objective) const;
};

// Nelder-Mead from two data-driven starts: the conventional logistic guess and
// the least-squares affine map (b1 = 0). Deterministic.
LogisticFit fit_logistic5(std::span<const double> objective, std::span<const double> subjective);

// PLCC between logistic-mapped objective scores and subjective scores.
double plcc_mapped(std::span<const double> objective, std::span<const double> subjective);

enum class Split { kTrain, kVal, kTest };
std::string_view to_string(Split s);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

using SplitAssignment = std::map<std::string, Split>;

// Sorted unique ids are shuffled and cut by floor(n * ratio); leftover
// references go to train, then val, then test.
SplitAssignment split_by_content(std::span<const std::string> reference_ids, const SplitRatios& ratios,
                                 std::uint64_t seed);

struct RunResult {
  double srocc = 0.0;
  double plcc = 0.0;
};

struct RepeatReport {
  double median_srocc = 0.0;
  double median_plcc = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<RunResult> runs;
};

// Runs with seeds base_seed .. base_seed + repetitions - 1.
RepeatReport repeat_eval(const std::function<RunResult(std::uint64_t seed)>& run, int repetitions,
                         std::uint64_t base_seed, int workers = 1);

struct IccResult {
  double icc = 0.0;
  double bms = 0.0;  // between-item mean square
  double wms = 0.0;  // within-item mean square
  double k0 = 0.0;   // effective group size
  std::size_t items = 0;
  std::size_t ratings = 0;
};

// One-way random effects ICC(1,1). Each inner vector holds one item's
// ratings, so missing cells are simply absent.
IccResult icc(const std::vector<std::vector<double>>& ratings);

struct RatingsTable {
  std::vector<std::string> image_ids;
  std::vector<std::vector<double>> ratings;
};

// CSV "image_id,rating", one row per rating; ratings must be integers 1..5.
RatingsTable read_ratings_csv(const std::filesystem::path& path);

struct BootstrapResult {
  double srocc = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  int resamples = 0;
};

// Per resample, each image's ratings are shuffled and cut into two halves;
// the two DMOS vectors are compared and the statistics averaged.
BootstrapResult intergroup_bootstrap(const RatingsTable& table, int resamples = 100, std::uint64_t seed = 0);

}  // namespace iqa::eval
