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

#include <filesystem>
#include <set>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/rng.hpp"
#include "distortion/internal.hpp"

namespace iqa {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> ref_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("I" + std::to_string(i + 1));
  return ids;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("iqa_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Distortion, MeanShiftOnConstant) {
  const ImageBuffer img(16, 16, 3, 0.5);
  const ImageBuffer out = apply_distortion(img, {DistortionKind::kMeanShift, 2, 1});
  for (double v : out.samples()) ASSERT_NEAR(v, 0.6, 1e-12);
}

TEST(Distortion, GaussianBlurKeepsConstant) {
  const ImageBuffer img(24, 20, 3, 0.37);
  for (int level = 1; level <= kNumLevels; ++level)
    EXPECT_EQ(apply_distortion(img, {DistortionKind::kGaussianBlur, level, 3}), img);
}

TEST(Distortion, PixelateWholeImageBlock) {
  // level 5 uses 32-pixel blocks; on a 32x32 image that is one block
  const ImageBuffer src = synthetic_reference(32, 32, 5);
  const ImageBuffer out = apply_distortion(src, {DistortionKind::kPixelate, 5, 0});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) ASSERT_DOUBLE_EQ(out.at(x, y, c), src.at(16, 16, c));
}

TEST(Distortion, EveryKindIsDeterministicAndInRange) {
  const ImageBuffer src = synthetic_reference(64, 48, 11);
  for (auto kind : all_kinds()) {
    for (int level : {1, 5}) {
      const DistortionSpec spec{kind, level, 99};
      const ImageBuffer a = apply_distortion(src, spec);
      const ImageBuffer b = apply_distortion(src, spec);
      ASSERT_EQ(a, b) << kind_name(kind);
      ASSERT_EQ(a.width(), 64);
      ASSERT_EQ(a.height(), 48);
      for (double v : a.samples()) ASSERT_TRUE(v >= 0.0 && v <= 1.0) << kind_name(kind);
    }
  }
}

TEST(Distortion, RejectsBadSpec) {
  const ImageBuffer src(8, 8, 3, 0.5);
  EXPECT_THROW(apply_distortion(src, {DistortionKind::kJpeg, 0, 0}), Error);
  EXPECT_THROW(apply_distortion(src, {DistortionKind::kJpeg, 6, 0}), Error);
  EXPECT_THROW(kind_from_ordinal(26), Error);
}

TEST(Distortion, KindNamesRoundTrip) {
  for (auto kind : all_kinds()) EXPECT_EQ(kind_from_name(kind_name(kind)), kind);
}

TEST(MedianFilter, ThreeByThreeMatchesSelection) {
  Rng rng(12);
  ImageBuffer img(23, 17, 3);
  for (auto& v : img.samples()) v = std::floor(rng.uniform() * 8) / 8;  // many ties
  const ImageBuffer out = detail::median_filter(img, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 17; ++y)
      for (int x = 0; x < 23; ++x) {
        std::vector<double> win;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            win.push_back(img.at(std::clamp(x + dx, 0, 22), std::clamp(y + dy, 0, 16), c));
        std::nth_element(win.begin(), win.begin() + 4, win.end());
        ASSERT_EQ(out.at(x, y, c), win[4]);
      }
}

TEST(ParamTable, RejectsNonMonotoneLadder) {
  nlohmann::json doc = {{"gaussian_blur", {{"levels", {1, 2, 2, 3, 4}}}}};
  EXPECT_THROW(DistortionParamTable::from_json(doc), Error);
  nlohmann::json ok = {{"gaussian_blur", {{"levels", {0.5, 1, 2, 3, 4}}}}};
  EXPECT_DOUBLE_EQ(DistortionParamTable::from_json(ok).value(DistortionKind::kGaussianBlur, 1), 0.5);
}

TEST(ParamTable, JsonRoundTrip) {
  const auto t = DistortionParamTable::defaults();
  EXPECT_EQ(DistortionParamTable::from_json(t.to_json()).to_json(), t.to_json());
}

TEST(Otsu, SplitsBimodalValues) {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(0.2);
  for (int i = 0; i < 100; ++i) v.push_back(0.8);
  const auto t = otsu_thresholds(v, 1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_GT(t[0], 0.2);
  EXPECT_LE(t[0], 0.8);
}

TEST(KadidPlan, Cardinality) {
  EXPECT_EQ(generate_kadid_plan(ref_ids(81)).size(), 10125u);  // 81 * 25 * 5
  const auto one = generate_kadid_plan(ref_ids(1));
  ASSERT_EQ(one.size(), 125u);
  std::set<std::string> ids;
  std::set<std::pair<int, int>> cells;
  for (const auto& r : one.records) {
    ids.insert(r.image_id);
    cells.insert({ordinal(r.kind), r.level});
  }
  EXPECT_EQ(ids.size(), 125u);
  EXPECT_EQ(cells.size(), 125u);
}

TEST(KadidPlan, TenReferencesDeterministic) {
  const auto a = generate_kadid_plan(ref_ids(10));
  EXPECT_EQ(a.size(), 1250u);
  EXPECT_EQ(a, generate_kadid_plan(ref_ids(10)));
}

TEST(KadisPlan, Cardinality) {
  EXPECT_EQ(generate_kadis_plan(ref_ids(140000), 1).size(), 700000u);
  EXPECT_EQ(generate_kadis_plan(ref_ids(1), 1).size(), 5u);
  EXPECT_EQ(generate_kadis_plan(ref_ids(20), 4), generate_kadis_plan(ref_ids(20), 4));
}

TEST(Manifest, CsvRoundTrip) {
  const auto m = generate_kadis_plan(ref_ids(3), 2, {"refs", "out"});
  const fs::path dir = scratch("manifest");
  write_manifest_csv(m, dir / "m.csv");
  EXPECT_EQ(read_manifest_csv(dir / "m.csv"), m);
  fs::remove_all(dir);
}

TEST(Manifest, DuplicateIdsRejected) {
  auto m = generate_kadid_plan(ref_ids(1));
  m.records[1].image_id = m.records[0].image_id;
  EXPECT_THROW(m.validate(), Error);
}

TEST(RunManifest, EmptyManifest) {
  RunOptions opt;
  const auto report = run_manifest(DatasetManifest{}, opt);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.written, 0u);
}

TEST(RunManifest, OneReferenceAllSpecsThenSkip) {
  const fs::path dir = scratch("run");
  write_png(synthetic_reference(600, 420, 2), dir / "R1.png");
  const std::vector<std::string> ids{"R1"};
  const auto m = generate_kadid_plan(ids);
  RunOptions opt;
  opt.ref_dir = dir;
  opt.out_dir = dir / "out";
  const auto first = run_manifest(m, opt);
  EXPECT_TRUE(first.ok());
  EXPECT_EQ(first.written, 125u);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) {
    ++files;
    if (files <= 3) {
      const ImageBuffer img = read_image(e.path());
      EXPECT_EQ(img.width(), 512);
      EXPECT_EQ(img.height(), 384);
    }
  }
  EXPECT_EQ(files, 125u);
  opt.skip_existing = true;
  const auto second = run_manifest(m, opt);
  EXPECT_EQ(second.written, 0u);
  EXPECT_EQ(second.skipped, 125u);
  fs::remove_all(dir);
}

TEST(RunManifest, MissingReferenceIsRecordedNotFatal) {
  const fs::path dir = scratch("missing");
  const std::vector<std::string> ids{"nope"};
  auto m = generate_kadis_plan(ids, 1);
  RunOptions opt;
  opt.ref_dir = dir;
  opt.out_dir = dir;
  const auto report = run_manifest(m, opt);
  EXPECT_EQ(report.failures.size(), 5u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace iqa
