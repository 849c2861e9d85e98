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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "iqa/error.hpp"
#include "iqa/evalstat.hpp"
#include "iqa/rng.hpp"
#include "iqa/scorepipe.hpp"

namespace iqa {
namespace {

TEST(Zscore, HandCase) {
  const auto z = zscore(std::vector<double>{1, 2, 3});
  EXPECT_NEAR(z[0], -1.0, 1e-15);
  EXPECT_NEAR(z[1], 0.0, 1e-15);
  EXPECT_NEAR(z[2], 1.0, 1e-15);
}

TEST(Zscore, Idempotent) {
  Rng rng(1);
  std::vector<double> x(50);
  for (auto& v : x) v = 3 + 2 * rng.normal();
  const auto z = zscore(x);
  const auto zz = zscore(z);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z[i], zz[i], 1e-12);
}

TEST(Zscore, ConstantIsDegenerate) {
  try {
    zscore(std::vector<double>{5, 5, 5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(He, HandCase) {
  const std::vector<double> x{10, 20, 30, 40};
  const auto t = fit_he(x);
  const auto y = apply_he(t, x);
  EXPECT_DOUBLE_EQ(y[0], 0.25);
  EXPECT_DOUBLE_EQ(y[1], 0.5);
  EXPECT_DOUBLE_EQ(y[2], 0.75);
  EXPECT_DOUBLE_EQ(y[3], 1.0);
}

TEST(He, ClampsOutsideRange) {
  const auto t = fit_he(std::vector<double>{1, 2, 3});
  EXPECT_EQ(apply_he(t, 0.5), 0.0);
  EXPECT_EQ(apply_he(t, 3.5), 1.0);
  EXPECT_NEAR(apply_he(t, 1.5), 0.5, 1e-15);  // halfway between 1/3 and 2/3
}

TEST(He, StrictlyMonotone) {
  Rng rng(2);
  std::vector<double> x(500);
  for (auto& v : x) v = rng.normal();
  const auto t = fit_he(x);
  std::vector<double> probe(1000);
  for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = -2.5 + 5.0 * i / 999.0;
  const auto y = apply_he(t, probe);
  for (std::size_t i = 1; i < y.size(); ++i) {
    // probes beyond the sample range clamp; inside it the map is strictly increasing
    if (probe[i - 1] >= t.knots.front() && probe[i] <= t.knots.back()) ASSERT_LT(y[i - 1], y[i]);
  }
}

TEST(He, SkewedSampleFillsBinsExactly) {
  Rng rng(3);
  const std::size_t n = 100000;
  const int bins = 256;
  std::set<double> distinct;
  while (distinct.size() < n) distinct.insert(std::pow(rng.uniform(), 1.0 / 5.0));  // beta(5,1)
  std::vector<double> x(distinct.begin(), distinct.end());
  rng.shuffle(std::span<double>(x));
  const auto t = fit_he(x, bins);
  const auto y = apply_he(t, x);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : y) ++counts[std::min<std::size_t>(bins - 1, static_cast<std::size_t>(v * bins))];
  for (auto c : counts) {
    EXPECT_GE(c, n / bins);
    EXPECT_LE(c, (n + bins - 1) / bins);
  }
  EXPECT_NEAR(eval::srocc(x, y), 1.0, 1e-12);
}

TEST(He, RefitConsistency) {
  Rng rng(4);
  std::vector<double> x(300);
  for (auto& v : x) v = std::exp(rng.normal());
  const auto t = fit_he(x);
  EXPECT_EQ(apply_he(t, x), apply_he(HETransform::from_json(t.to_json()), x));
}

TEST(He, TiesShareMidrank) {
  const auto t = fit_he(std::vector<double>{1, 2, 2, 3});
  EXPECT_DOUBLE_EQ(apply_he(t, 2.0), 2.5 / 4.0);
}

TEST(He, InfinitySurvivesJson) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto t = fit_he(std::vector<double>{20, 30, inf, inf});
  const auto back = HETransform::from_json(t.to_json());
  EXPECT_EQ(back, t);
  EXPECT_DOUBLE_EQ(apply_he(back, inf), 3.5 / 4.0);  // tied infinities share a midrank
}

TEST(He, Rejects) {
  EXPECT_THROW(fit_he(std::vector<double>{1, 1, 1}), Error);
  EXPECT_THROW(fit_he(std::vector<double>{1, NAN, 2}), Error);
}

TEST(He, QuantileGridEnds) {
  const auto t = fit_he(std::vector<double>{1, 2, 3, 4, 5}, 4);
  const auto g = t.quantile_grid();
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 1.0);
  EXPECT_DOUBLE_EQ(g.back(), 5.0);
}

}  // namespace
}  // namespace iqa
