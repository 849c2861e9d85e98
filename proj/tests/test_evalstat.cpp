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
#include <filesystem>
#include <fstream>
#include <set>

#include "iqa/error.hpp"
#include "iqa/evalstat.hpp"
#include "iqa/neuro.hpp"
#include "iqa/rng.hpp"

namespace iqa::eval {
namespace {

using Vec = std::vector<double>;

TEST(Srocc, HandCases) {
  EXPECT_DOUBLE_EQ(srocc(Vec{1, 2, 3, 4}, Vec{2, 3, 9, 10}), 1.0);
  EXPECT_DOUBLE_EQ(srocc(Vec{1, 2, 3, 4}, Vec{9, 3, 2, 1}), -1.0);
  EXPECT_NEAR(srocc(Vec{1, 2, 3}, Vec{10, 20, 15}), 0.5, 1e-15);
  EXPECT_THROW(srocc(Vec{1, 1, 1}, Vec{1, 2, 3}), Error);
}

TEST(Dmos, Mean) {
  EXPECT_DOUBLE_EQ(dmos(std::vector<int>{5, 5, 5}), 5.0);
  EXPECT_DOUBLE_EQ(dmos(std::vector<int>{1, 2, 3, 4, 5}), 3.0);
  std::vector<int> thirty(30);
  for (int i = 0; i < 30; ++i) thirty[i] = 1 + i % 5;
  EXPECT_DOUBLE_EQ(dmos(thirty), 3.0);
  EXPECT_THROW(dmos(std::vector<int>{0, 3}), Error);
  EXPECT_THROW(dmos(std::vector<int>{6}), Error);
}

TEST(Logistic, AffineIsExact) {
  Vec o(40), s(40);
  for (int i = 0; i < 40; ++i) {
    o[i] = i * 0.37 - 3;
    s[i] = 2.5 * o[i] + 1.0;
  }
  EXPECT_NEAR(plcc_mapped(o, s), 1.0, 1e-9);
}

Vec logistic5(const std::array<double, 5>& b, const Vec& o) {
  Vec s(o.size());
  for (std::size_t i = 0; i < o.size(); ++i)
    s[i] = b[0] * (0.5 - 1.0 / (1.0 + std::exp(b[1] * (o[i] - b[2])))) + b[3] * o[i] + b[4];
  return s;
}

TEST(Logistic, NoisyRefit) {
  Rng rng(1);
  Vec o(300);
  for (auto& v : o) v = rng.uniform();
  auto s = logistic5({4.0, 10.0, 0.5, 0.2, 3.0}, o);
  for (auto& v : s) v += 0.01 * rng.normal();
  EXPECT_GE(plcc_mapped(o, s), 0.999);
}

TEST(Logistic, RefitDoesNotIncreaseResidual) {
  Rng rng(2);
  Vec o(100);
  for (auto& v : o) v = rng.uniform();
  auto s = logistic5({2.0, 8.0, 0.4, 0.0, 1.0}, o);
  for (auto& v : s) v += 0.05 * rng.normal();
  const auto fit = fit_logistic5(o, s);
  const auto mapped = fit.map(o);
  const auto refit = fit_logistic5(o, mapped);
  EXPECT_LE(refit.residual, 1e-12 + 1e-9 * fit.residual);
}

TEST(Logistic, SquashBeatsRawAndOrientationAbsorbed) {
  Vec o(200), s(200), neg(200);
  for (int i = 0; i < 200; ++i) {
    o[i] = -4 + 8.0 * i / 199.0;
    s[i] = 1.0 / (1.0 + std::exp(-2.0 * o[i]));
    neg[i] = -s[i];
  }
  const double mapped = plcc_mapped(o, s);
  EXPECT_GE(mapped, nn::plcc(o, s));
  EXPECT_NEAR(std::abs(plcc_mapped(o, neg)), mapped, 1e-6);
  EXPECT_NEAR(plcc_mapped(o, o), 1.0, 1e-12);
}

TEST(Logistic, ConstantObjectiveIsDegenerate) { EXPECT_THROW(fit_logistic5(Vec{1, 1, 1, 1}, Vec{1, 2, 3, 4}), Error); }

std::vector<std::string> refs(int n) {
  std::vector<std::string> r;
  for (int i = 0; i < n; ++i) r.push_back("I" + std::to_string(i));
  return r;
}

TEST(Split, EightyOneReferences) {
  const auto ids = refs(81);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = split_by_content(ids, {}, seed);
    ASSERT_EQ(a.size(), 81u);
    int n[3] = {0, 0, 0};
    for (const auto& [id, s] : a) n[static_cast<int>(s)] += 1;
    EXPECT_EQ(n[0], 49);
    EXPECT_EQ(n[1], 16);
    EXPECT_EQ(n[2], 16);
  }
  EXPECT_EQ(split_by_content(ids, {}, 4), split_by_content(ids, {}, 4));
  EXPECT_NE(split_by_content(ids, {}, 4), split_by_content(ids, {}, 5));
}

TEST(Split, Errors) {
  EXPECT_THROW(split_by_content(refs(2), {}, 0), Error);
  EXPECT_THROW(split_by_content(refs(10), {0.5, 0.5, 0.5}, 0), Error);
}

TEST(Repeat, Medians) {
  const auto one = repeat_eval([](std::uint64_t) { return RunResult{0.7, 0.8}; }, 1, 0);
  EXPECT_EQ(one.median_srocc, 0.7);
  const auto r = repeat_eval([](std::uint64_t s) { return RunResult{static_cast<double>(s % 5), 0.5}; }, 5, 10);
  EXPECT_EQ(r.median_srocc, 2.0);
  EXPECT_EQ(r.median_plcc, 0.5);
  EXPECT_EQ(r.seeds, (std::vector<std::uint64_t>{10, 11, 12, 13, 14}));
  const auto w = repeat_eval([](std::uint64_t s) { return RunResult{static_cast<double>(s % 5), 0.5}; }, 5, 10, 3);
  EXPECT_EQ(w.median_srocc, r.median_srocc);
}

TEST(Repeat, FailureNamesRun) {
  try {
    repeat_eval([](std::uint64_t s) -> RunResult {
      if (s == 2) throw Error(ErrorCode::kDegenerate, "boom");
      return {};
    }, 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(Icc, IdenticalRaters) {
  std::vector<std::vector<double>> r{{1, 1, 1}, {3, 3, 3}, {5, 5, 5}, {2, 2, 2}};
  EXPECT_DOUBLE_EQ(icc(r).icc, 1.0);
}

TEST(Icc, NoItemEffect) {
  Rng rng(3);
  std::vector<std::vector<double>> r(500, std::vector<double>(30));
  for (auto& item : r)
    for (auto& v : item) v = rng.normal();
  EXPECT_LT(std::abs(icc(r).icc), 0.05);
}

TEST(Icc, VarianceComponents) {
  Rng rng(4);
  std::vector<std::vector<double>> r(500, std::vector<double>(30));
  for (auto& item : r) {
    const double b = rng.normal();
    for (auto& v : item) v = b + std::sqrt(0.5) * rng.normal();
  }
  EXPECT_NEAR(icc(r).icc, 1.0 / 1.5, 0.05);
}

TEST(Icc, UnbalancedAndErrors) {
  std::vector<std::vector<double>> r{{1, 2}, {4, 5, 4}, {2}};
  const auto res = icc(r);
  EXPECT_EQ(res.items, 3u);
  EXPECT_EQ(res.ratings, 6u);
  EXPECT_THROW(icc({{1}, {2}}), Error);
}

TEST(Bootstrap, AgreeingRaters) {
  RatingsTable t;
  for (int i = 0; i < 20; ++i) {
    t.image_ids.push_back("i" + std::to_string(i));
    t.ratings.push_back(std::vector<double>(6, 1 + i % 5));
  }
  const auto b = intergroup_bootstrap(t, 10, 1);
  EXPECT_DOUBLE_EQ(b.srocc, 1.0);
  EXPECT_EQ(b.mae, 0.0);
  EXPECT_EQ(b.rmse, 0.0);
  EXPECT_EQ(b.resamples, 10);
}

TEST(Bootstrap, HalfGroupNoise) {
  // two means of 15 ratings with noise 0.5: difference has sd sqrt(2 * 0.25 / 15)
  Rng rng(5);
  RatingsTable t;
  for (int i = 0; i < 1000; ++i) {
    t.image_ids.push_back("i" + std::to_string(i));
    const double truth = 1 + 4 * rng.uniform();
    std::vector<double> r(30);
    for (auto& v : r) v = truth + 0.5 * rng.normal();
    t.ratings.push_back(r);
  }
  const double sd = std::sqrt(2 * 0.25 / 15);
  const double mae = sd * std::sqrt(2 / M_PI);
  const auto b = intergroup_bootstrap(t, 20, 2);
  EXPECT_NEAR(b.mae, mae, 0.1 * mae);
  EXPECT_NEAR(b.rmse, sd, 0.1 * sd);
}

TEST(Bootstrap, RejectsSingleRating) {
  RatingsTable t{{"a", "b"}, {{1, 2}, {3}}};
  EXPECT_THROW(intergroup_bootstrap(t, 5, 0), Error);
}

TEST(Ratings, CsvGroupsAndValidates) {
  const auto dir = std::filesystem::temp_directory_path() / "iqa_test_ratings";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "r.csv") << "image_id,rating\na,1\nb,5\na,3\n";
  const auto t = read_ratings_csv(dir / "r.csv");
  ASSERT_EQ(t.image_ids.size(), 2u);
  const auto a = std::find(t.image_ids.begin(), t.image_ids.end(), "a") - t.image_ids.begin();
  EXPECT_EQ(t.ratings[a], (std::vector<double>{1, 3}));
  std::ofstream(dir / "bad.csv") << "image_id,rating\na,7\n";
  EXPECT_THROW(read_ratings_csv(dir / "bad.csv"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace iqa::eval
