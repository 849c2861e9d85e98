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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "iqa/error.hpp"
#include "iqa/features.hpp"
#include "iqa/imgcore.hpp"
#include "iqa/rng.hpp"

namespace iqa {
namespace {

namespace fs = std::filesystem;

ActivationBlock random_block(int h, int w, int c, Rng& rng) {
  ActivationBlock b{h, w, c, std::vector<float>(static_cast<std::size_t>(h) * w * c)};
  for (auto& v : b.data) v = static_cast<float>(rng.normal());
  return b;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("iqa_test_features_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(GapPool, HandCases) {
  const ActivationBlock b{2, 2, 1, {1, 2, 3, 4}};
  EXPECT_EQ(gap_pool(b), std::vector<float>{2.5f});
  const ActivationBlock c{3, 5, 2, std::vector<float>(30, 0.75f)};
  EXPECT_EQ(gap_pool(c), (std::vector<float>{0.75f, 0.75f}));
  const ActivationBlock one{1, 1, 4, {1, -2, 3, 9}};
  EXPECT_EQ(gap_pool(one), one.data);
}

TEST(GapPool, Linear) {
  Rng rng(1);
  const auto x = random_block(4, 3, 5, rng);
  const auto y = random_block(4, 3, 5, rng);
  ActivationBlock z = x;
  for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] = 2.0f * x.data[i] - 0.5f * y.data[i];
  const auto gx = gap_pool(x), gy = gap_pool(y), gz = gap_pool(z);
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(gz[c], 2.0f * gx[c] - 0.5f * gy[c], 1e-5);
}

TEST(GapPool, InvalidBlock) {
  const ActivationBlock b{2, 2, 2, {1, 2, 3}};
  EXPECT_THROW(gap_pool(b), Error);
}

TEST(Mlsp, ConcatOrderAndLength) {
  Rng rng(2);
  const std::vector<ActivationBlock> blocks{random_block(2, 2, 3, rng), random_block(3, 1, 5, rng)};
  const auto v = mlsp_concat(blocks);
  ASSERT_EQ(v.size(), 8u);
  const auto a = gap_pool(blocks[0]), b = gap_pool(blocks[1]);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), v.begin()));
  EXPECT_TRUE(std::equal(b.begin(), b.end(), v.begin() + 3));
  const std::vector<ActivationBlock> swapped{blocks[1], blocks[0]};
  const auto w = mlsp_concat(swapped);
  EXPECT_TRUE(std::equal(b.begin(), b.end(), w.begin()));
  EXPECT_EQ(mlsp_concat(std::span(blocks).first(1)), a);
  EXPECT_THROW(mlsp_concat({}), Error);
}

TEST(Mlsp, CanonicalSchedule) {
  const auto s = canonical_mlsp_schedule();
  EXPECT_EQ(s.size(), 43u);
  EXPECT_EQ(std::accumulate(s.begin(), s.end(), 0), kCanonicalMlspDim);
  std::vector<ActivationBlock> blocks;
  for (int c : s) blocks.push_back(ActivationBlock{1, 1, c, std::vector<float>(c, 1.0f)});
  EXPECT_EQ(mlsp_concat(blocks).size(), 16928u);
}

TEST(Store, Validation) {
  FeatureStore s(3);
  const std::vector<float> v{1, 2, 3};
  s.add("a", v);
  EXPECT_THROW(s.add("a", v), Error);
  EXPECT_THROW(s.add("b", std::vector<float>{1, 2}), Error);
  EXPECT_THROW(FeatureStore(0), Error);
  EXPECT_EQ(s.find("a"), std::optional<std::size_t>(0));
  EXPECT_FALSE(s.find("z").has_value());
}

TEST_F(TempDir, StoreRoundTrip) {
  Rng rng(3);
  FeatureStore s(16);
  std::vector<float> v(16);
  for (int i = 0; i < 100; ++i) {
    for (auto& x : v) x = static_cast<float>(rng.normal());
    s.add("img_" + std::to_string(i), v);
  }
  write_store(s, dir_ / "a.mlsp");
  const auto back = read_store(dir_ / "a.mlsp");
  EXPECT_EQ(back, s);
  write_store(back, dir_ / "b.mlsp");
  std::ifstream a(dir_ / "a.mlsp", std::ios::binary), b(dir_ / "b.mlsp", std::ios::binary);
  EXPECT_TRUE(std::equal(std::istreambuf_iterator<char>(a), {}, std::istreambuf_iterator<char>(b), {}));
}

TEST_F(TempDir, EmptyStoreReadable) {
  write_store(FeatureStore(16), dir_ / "e.mlsp");
  const auto back = read_store(dir_ / "e.mlsp");
  EXPECT_EQ(back.dim(), 16);
  EXPECT_EQ(back.size(), 0u);
}

TEST_F(TempDir, BadMagicAndTruncation) {
  FeatureStore s(4);
  s.add("x", std::vector<float>{1, 2, 3, 4});
  write_store(s, dir_ / "s.mlsp");
  std::string bytes;
  {
    std::ifstream in(dir_ / "s.mlsp", std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  std::string bad = bytes;
  bad[0] = 'X';
  std::ofstream(dir_ / "bad.mlsp", std::ios::binary) << bad;
  try {
    read_store(dir_ / "bad.mlsp");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(std::string(e.what()).find("offset 0"), std::string::npos);
  }
  std::ofstream(dir_ / "short.mlsp", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(read_store(dir_ / "short.mlsp"), Error);
}

void write_f32(const fs::path& path, const std::vector<float>& v) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
}

TEST_F(TempDir, IngestActivationDir) {
  // two blocks: 2x2x1 and 1x1x2, hwc
  write_f32(dir_ / "im1.f32", {1, 2, 3, 4, 7, 8});
  std::ofstream(dir_ / "im1.json") << R"({"blocks":[{"shape":[2,2,1]},{"shape":[1,1,2]}]})";
  // same content in chw: block 2 of 1x2x2 with channels (0,2) and (4,6)
  write_f32(dir_ / "im2.f32", {1, 2, 3, 4, 0, 2, 4, 6});
  std::ofstream(dir_ / "im2.json") << R"({"layout":"chw","blocks":[{"shape":[2,2,1]},{"shape":[1,2,2]}]})";
  const auto store = ingest_activation_dir(dir_);
  ASSERT_EQ(store.size(), 2u);
  EXPECT_EQ(store.dim(), 3);
  const auto r1 = store.row(*store.find("im1"));
  EXPECT_EQ(std::vector<float>(r1.begin(), r1.end()), (std::vector<float>{2.5f, 7, 8}));
  const auto r2 = store.row(*store.find("im2"));
  EXPECT_EQ(std::vector<float>(r2.begin(), r2.end()), (std::vector<float>{2.5f, 1, 5}));
}

TEST_F(TempDir, IngestRejectsSizeMismatch) {
  write_f32(dir_ / "a.f32", {1, 2, 3});
  std::ofstream(dir_ / "a.json") << R"({"blocks":[{"shape":[2,2,1]}]})";
  EXPECT_THROW(ingest_activation_dir(dir_), Error);
}

TEST(Scaler, StandardizesFitRows) {
  FeatureStore s(2);
  s.add("a", std::vector<float>{1, 5});
  s.add("b", std::vector<float>{3, 5});
  s.add("c", std::vector<float>{100, 0});
  const std::vector<std::size_t> rows{0, 1};
  const auto sc = FeatureScaler::fit(s, rows);
  EXPECT_DOUBLE_EQ(sc.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(sc.scale[0], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(sc.scale[1], 1.0);  // constant column
  const auto z = sc.apply(s.row(0));
  EXPECT_DOUBLE_EQ(z[0], -1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(z[1], 0.0);
  const auto back = FeatureScaler::from_json(sc.to_json());
  EXPECT_EQ(back.mean, sc.mean);
  EXPECT_EQ(back.scale, sc.scale);
}

TEST(Filterbank, ShapeAndDeterminism) {
  ImageBuffer img(96, 64, 3);
  Rng rng(4);
  for (auto& v : img.samples()) v = rng.uniform();
  const auto a = filterbank_activations(img);
  EXPECT_EQ(a.size(), static_cast<std::size_t>(kFilterbankScales));
  for (const auto& b : a) EXPECT_EQ(b.channels, kFilterbankChannels);
  const auto b = filterbank_activations(img);
  EXPECT_EQ(mlsp_concat(a), mlsp_concat(b));
}

}  // namespace
}  // namespace iqa
