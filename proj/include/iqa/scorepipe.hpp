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

#include <span>
#include <string>
#include <vector>

// Score normalization: z-scoring and histogram equalization by empirical CDF.
namespace iqa {

// (x - mean) / sample std. Throws kDegenerate on constant input.
std::vector<double> zscore(std::span<const double> x);

// Monotone map from raw metric scores to [0,1]. `knots` are the distinct
// training values in ascending order and `cdf` the midrank/N quantile of each.
struct HETransform {
  std::vector<double> knots;
  std::vector<double> cdf;
  int bins = 256;

  bool operator==(const HETransform&) const = default;

  // Quantiles of the reference values at i/bins, i = 0..bins.
  std::vector<double> quantile_grid() const;

  std::string to_json() const;
  static HETransform from_json(const std::string& text);
};

HETransform fit_he(std::span<const double> train_scores, int bins = 256);

// Below the first knot -> 0, above the last -> 1, knots map to their fitted
// value and anything in between is interpolated linearly.
double apply_he(const HETransform& t, double x);
std::vector<double> apply_he(const HETransform& t, std::span<const double> x);

}  // namespace iqa
