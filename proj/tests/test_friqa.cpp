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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/friqa.hpp"
#include "iqa/rng.hpp"

namespace iqa {
namespace {

namespace fs = std::filesystem;

ImageBuffer noise_gray(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(w, h, 1);
  for (auto& v : img.samples()) v = rng.uniform();
  return img;
}

ImageBuffer add_noise(const ImageBuffer& img, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer out = img;
  for (auto& v : out.samples()) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("iqa_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Psnr, ClosedForms) {
  const ImageBuffer a(8, 8, 3, 0.0), b(8, 8, 3, 1.0);
  EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(psnr(a, b), 0.0, 1e-12);
  // constant offset 0.1 gives MSE 0.01
  EXPECT_NEAR(psnr(ImageBuffer(8, 8, 3, 0.3), ImageBuffer(8, 8, 3, 0.4)), 20.0, 1e-9);
}

TEST(Psnr, DimensionMismatch) { EXPECT_THROW(psnr(ImageBuffer(4, 4, 3), ImageBuffer(4, 5, 3)), Error); }

TEST(Ssim, Identity) {
  const ImageBuffer x = noise_gray(48, 40, 1);
  EXPECT_NEAR(ssim(x, x), 1.0, 1e-12);
}

TEST(Ssim, ConstantClosedForm) {
  const double c1 = 0.01 * 0.01;
  const double expected = (2 * 0.4 * 0.6 + c1) / (0.4 * 0.4 + 0.6 * 0.6 + c1);
  EXPECT_NEAR(ssim(ImageBuffer(32, 32, 1, 0.4), ImageBuffer(32, 32, 1, 0.6)), expected, 1e-9);
  EXPECT_NEAR(expected, 0.923092, 1e-6);
}

TEST(Ssim, Symmetric) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ImageBuffer a = noise_gray(30, 30, s), b = add_noise(a, 0.1, s + 100);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
  }
}

TEST(Ssim, MapMatchesBruteForceWindow) {
  const ImageBuffer a = noise_gray(16, 16, 7), b = add_noise(a, 0.2, 8);
  const ImageBuffer map = ssim_map(a, b);
  ASSERT_EQ(map.width(), 6);
  ASSERT_EQ(map.height(), 6);
  const Kernel2D w = gaussian_kernel(1.5, 11);
  const double c1 = 1e-4, c2 = 9e-4;
  for (int y0 = 0; y0 < 6; ++y0)
    for (int x0 = 0; x0 < 6; ++x0) {
      double ma = 0, mb = 0;
      for (int j = 0; j < 11; ++j)
        for (int i = 0; i < 11; ++i) {
          ma += w.at(i, j) * a.at(x0 + i, y0 + j, 0);
          mb += w.at(i, j) * b.at(x0 + i, y0 + j, 0);
        }
      double va = 0, vb = 0, cov = 0;
      for (int j = 0; j < 11; ++j)
        for (int i = 0; i < 11; ++i) {
          const double da = a.at(x0 + i, y0 + j, 0) - ma, db = b.at(x0 + i, y0 + j, 0) - mb;
          va += w.at(i, j) * da * da;
          vb += w.at(i, j) * db * db;
          cov += w.at(i, j) * da * db;
        }
      const double s = ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      EXPECT_NEAR(map.at(x0, y0, 0), s, 1e-9);
    }
}

TEST(MsSsim, IdentityAndConstant) {
  const ImageBuffer x = noise_gray(180, 176, 3);
  EXPECT_NEAR(ms_ssim(x, x), 1.0, 1e-10);
  const double c1 = 1e-4;
  const double lum = (2 * 0.4 * 0.6 + c1) / (0.4 * 0.4 + 0.6 * 0.6 + c1);
  EXPECT_NEAR(ms_ssim(ImageBuffer(176, 176, 1, 0.4), ImageBuffer(176, 176, 1, 0.6)),
              std::pow(lum, kMsSsimWeights[4]), 1e-9);
}

TEST(MsSsim, DecreasesWithNoise) {
  const ImageBuffer x = synthetic_reference(192, 192, 4);
  const double a = ms_ssim(x, add_noise(x, 0.02, 1));
  const double b = ms_ssim(x, add_noise(x, 0.06, 1));
  const double c = ms_ssim(x, add_noise(x, 0.10, 1));
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
}

TEST(MsSsim, TooSmall) { EXPECT_THROW(ms_ssim(ImageBuffer(100, 200, 1), ImageBuffer(100, 200, 1)), Error); }

TEST(Gmsd, ClosedForms) {
  const ImageBuffer x = noise_gray(40, 30, 9);
  EXPECT_NEAR(gmsd(x, x), 0.0, 1e-12);
  EXPECT_NEAR(gmsd(ImageBuffer(20, 20, 1, 0.2), ImageBuffer(20, 20, 1, 0.7)), 0.0, 1e-12);
  EXPECT_GT(gmsd(x, add_noise(x, 0.05, 2)), 0.0);
}

TEST(Metrics, PolarityAndDispatch) {
  EXPECT_EQ(builtin_polarity("GMSD"), Polarity::kLowerBetter);
  EXPECT_EQ(builtin_polarity("SSIM"), Polarity::kHigherBetter);
  EXPECT_TRUE(is_builtin_metric("MSSSIM"));
  EXPECT_THROW(compute_metric("nope", ImageBuffer(4, 4, 1), ImageBuffer(4, 4, 1)), Error);
}

class ScoreDatasetTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch("score");
    write_png(synthetic_reference(192, 176, 1), dir_ / "R1.png");
    const std::vector<std::string> ids{"R1"};
    manifest_ = generate_kadid_plan(ids, {dir_, dir_ / "out"});
    RunOptions opt;
    opt.preprocess = false;
    ASSERT_TRUE(run_manifest(manifest_, opt).ok());
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  DatasetManifest manifest_;
  const std::vector<std::string> metrics_{"PSNR", "SSIM", "MSSSIM", "GMSD"};
};

TEST_F(ScoreDatasetTest, CardinalityAndDeterminism) {
  const auto a = score_dataset(manifest_, metrics_);
  EXPECT_EQ(a.table.rows(), 125u);
  EXPECT_EQ(a.table.cols(), 4u);
  ScoreOptions two;
  two.workers = 2;
  const auto b = score_dataset(manifest_, metrics_, two);
  write_score_csv(a.table, dir_ / "a.csv");
  write_score_csv(b.table, dir_ / "b.csv");
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_EQ(read_score_csv(dir_ / "a.csv", {{"GMSD", Polarity::kLowerBetter}}), a.table);
}

TEST_F(ScoreDatasetTest, SelfPairs) {
  DatasetManifest self = manifest_;
  for (auto& r : self.records) r.dist_path = r.ref_path;
  const auto t = score_dataset(self, metrics_).table;
  for (double v : t.column("SSIM")) EXPECT_NEAR(v, 1.0, 1e-12);
  for (double v : t.column("GMSD")) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : t.column("PSNR")) EXPECT_TRUE(std::isinf(v));
}

TEST_F(ScoreDatasetTest, UnreadableRowExcluded) {
  DatasetManifest m = manifest_;
  m.records.resize(3);
  m.records[1].dist_path = (dir_ / "missing.png").string();
  const auto r = score_dataset(m, metrics_);
  EXPECT_EQ(r.table.rows(), 2u);
  ASSERT_EQ(r.excluded.size(), 1u);
  EXPECT_EQ(r.excluded[0].image_id, m.records[1].image_id);
}

TEST(Ingest, JoinsMissingAndEmpty) {
  const fs::path dir = scratch("ingest");
  ScoreTable table({"a", "b", "c"}, {"PSNR"}, {Polarity::kHigherBetter});
  {
    std::ofstream f(dir / "full.csv");
    f << "image_id,VIF\na,0.5\nb,0.6\nc,0.7\n";
    std::ofstream p(dir / "part.csv");
    p << "image_id,VIF\na,0.5\nc,0.7\n";
    std::ofstream e(dir / "empty.csv");
    e << "image_id,VIF\n";
  }
  const auto full = ingest_external_scores(dir / "full.csv", table);
  EXPECT_EQ(full.table.cols(), 2u);
  EXPECT_DOUBLE_EQ(full.table.value(1, 1), 0.6);

  try {
    ingest_external_scores(dir / "part.csv", table);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
  const auto part = ingest_external_scores(dir / "part.csv", table, true);
  EXPECT_EQ(part.table.rows(), 2u);
  ASSERT_EQ(part.missing_in_csv.size(), 1u);
  EXPECT_EQ(part.missing_in_csv[0], "b");

  try {
    ingest_external_scores(dir / "empty.csv", table);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no data rows"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(ScoreCsv, InfinityRoundTrip) {
  const fs::path dir = scratch("inf");
  ScoreTable t({"x", "y"}, {"PSNR"}, {Polarity::kHigherBetter});
  t.set(0, 0, std::numeric_limits<double>::infinity());
  t.set(1, 0, 31.25);
  write_score_csv(t, dir / "s.csv");
  EXPECT_EQ(read_score_csv(dir / "s.csv"), t);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace iqa
