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
#include <vector>

// Descriptive statistics shared by the loss, normalization and evaluation code.
namespace iqa::stats {

double mean(std::span<const double> x);

// Sample variance with (N-1) normalization; requires N >= 2.
double sample_variance(std::span<const double> x);

// Pearson correlation. Throws ErrorCode::kDegenerate when either input has
// zero variance and kInvalidArgument on length mismatch or N < 2.
double pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks, ties receive the average of the positions they span.
std::vector<double> midranks(std::span<const double> x);

// Pearson correlation of midranks.
double spearman(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

}  // namespace iqa::stats
