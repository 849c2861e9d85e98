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

#include <algorithm>
#include <cmath>
#include <limits>

#include "iqa/error.hpp"
#include "iqa/scorepipe.hpp"
#include "iqa/stats.hpp"
#include "json.hpp"

namespace iqa {

namespace {

// JSON has no infinities; they are spelled as strings.
nlohmann::json encode(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) {
    if (std::isinf(x))
      a.push_back(x > 0 ? "inf" : "-inf");
    else
      a.push_back(x);
  }
  return a;
}

std::vector<double> decode(const nlohmann::json& a) {
  std::vector<double> out;
  for (const auto& x : a) {
    if (x.is_string()) {
      const auto s = x.get<std::string>();
      if (s != "inf" && s != "-inf") fail(ErrorCode::kValidation, "malformed transform JSON: bad value '" + s + "'");
      out.push_back(s == "inf" ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity());
    } else {
      out.push_back(x.get<double>());
    }
  }
  return out;
}

}  // namespace

std::vector<double> zscore(std::span<const double> x) {
  require(x.size() >= 2, "zscore needs at least two values");
  const double m = stats::mean(x);
  const double sd = std::sqrt(stats::sample_variance(x));
  if (!(sd > 0.0)) fail(ErrorCode::kDegenerate, "zscore of a constant vector (degenerate distribution)");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / sd;
  return out;
}

HETransform fit_he(std::span<const double> train_scores, int bins) {
  require(bins >= 1, "bin count must be positive");
  for (double v : train_scores)
    if (std::isnan(v)) fail(ErrorCode::kValidation, "histogram equalization: NaN score");
  std::vector<double> sorted(train_scores.begin(), train_scores.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() < 2 || sorted.front() == sorted.back())
    fail(ErrorCode::kDegenerate, "histogram equalization needs at least two distinct scores");

  HETransform t;
  t.bins = bins;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    // positions i+1..j share the average rank
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    t.knots.push_back(sorted[i]);
    t.cdf.push_back(midrank / n);
    i = j;
  }
  return t;
}

double apply_he(const HETransform& t, double x) {
  require(!t.knots.empty() && t.knots.size() == t.cdf.size(), "histogram equalization transform is not fitted");
  if (std::isnan(x)) fail(ErrorCode::kValidation, "cannot equalize NaN");
  if (x < t.knots.front()) return 0.0;
  if (x > t.knots.back()) return 1.0;
  const auto it = std::lower_bound(t.knots.begin(), t.knots.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - t.knots.begin());
  if (*it == x) return t.cdf[hi];
  const std::size_t lo = hi - 1;
  if (std::isinf(t.knots[hi]) || std::isinf(t.knots[lo])) return t.cdf[std::isinf(t.knots[hi]) ? lo : hi];
  const double f = (x - t.knots[lo]) / (t.knots[hi] - t.knots[lo]);
  return std::clamp(t.cdf[lo] + f * (t.cdf[hi] - t.cdf[lo]), 0.0, 1.0);
}

std::vector<double> apply_he(const HETransform& t, std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = apply_he(t, x[i]);
  return out;
}

std::vector<double> HETransform::quantile_grid() const {
  require(!knots.empty(), "histogram equalization transform is not fitted");
  std::vector<double> grid;
  for (int i = 0; i <= bins; ++i) {
    const double p = static_cast<double>(i) / bins;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
    if (it == cdf.end()) {
      grid.push_back(knots.back());
    } else if (it == cdf.begin()) {
      grid.push_back(knots.front());
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - cdf.begin());
      const double f = (p - cdf[hi - 1]) / (cdf[hi] - cdf[hi - 1]);
      grid.push_back(f == 0.0 ? knots[hi - 1] : knots[hi - 1] + f * (knots[hi] - knots[hi - 1]));
    }
  }
  return grid;
}

std::string HETransform::to_json() const {
  nlohmann::ordered_json doc;
  doc["type"] = "he";
  doc["bins"] = bins;
  doc["range"] = encode({knots.front(), knots.back()});
  doc["knots"] = encode(knots);
  doc["cdf"] = cdf;
  doc["quantile_grid"] = encode(quantile_grid());
  return doc.dump();
}

HETransform HETransform::from_json(const std::string& text) {
  HETransform t;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("type", "") != "he") fail(ErrorCode::kValidation, "not a histogram equalization transform");
    t.bins = doc.at("bins").get<int>();
    t.knots = decode(doc.at("knots"));
    t.cdf = doc.at("cdf").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kValidation, std::string("malformed transform JSON: ") + e.what());
  }
  if (t.knots.empty() || t.knots.size() != t.cdf.size() || t.bins < 1)
    fail(ErrorCode::kValidation, "malformed transform JSON: knots/cdf mismatch");
  for (std::size_t i = 1; i < t.knots.size(); ++i)
    if (!(t.knots[i] > t.knots[i - 1]) || t.cdf[i] < t.cdf[i - 1])
      fail(ErrorCode::kValidation, "malformed transform JSON: knots must be strictly increasing");
  return t;
}

}  // namespace iqa
