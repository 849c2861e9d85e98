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

#include "iqa/error.hpp"
#include "iqa/imgcore.hpp"
#include "iqa/rng.hpp"

namespace iqa {
namespace {

ImageBuffer random_rgb(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(w, h, 3);
  for (auto& v : img.samples()) v = rng.uniform();
  return img;
}

TEST(Color, WhiteIsUnsaturated) {
  const ImageBuffer white(4, 3, 3, 1.0);
  const ImageBuffer hsv = color_convert(white, ColorSpace::kHSV);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) {
      EXPECT_DOUBLE_EQ(hsv.at(x, y, 2), 1.0);
      EXPECT_DOUBLE_EQ(hsv.at(x, y, 1), 0.0);
    }
}

TEST(Color, BlackYCbCrHasCentredChroma) {
  const ImageBuffer ycc = color_convert(ImageBuffer(2, 2, 3, 0.0), ColorSpace::kYCbCr);
  EXPECT_NEAR(ycc.at(1, 1, 0), 0.0, 1e-15);
  EXPECT_NEAR(ycc.at(1, 1, 1), 0.5, 1e-15);
  EXPECT_NEAR(ycc.at(1, 1, 2), 0.5, 1e-15);
}

TEST(Color, LabRoundTrip) {
  const ImageBuffer rgb = random_rgb(40, 25, 3);  // 1000 pixels
  const ImageBuffer back = to_rgb(color_convert(rgb, ColorSpace::kLab));
  double worst = 0.0;
  for (std::size_t i = 0; i < rgb.samples().size(); ++i)
    worst = std::max(worst, std::abs(rgb.samples()[i] - back.samples()[i]));
  EXPECT_LT(worst, 1e-4);
}

TEST(Color, HsvAndYCbCrRoundTrip) {
  const ImageBuffer rgb = random_rgb(16, 16, 4);
  for (auto space : {ColorSpace::kHSV, ColorSpace::kYCbCr}) {
    const ImageBuffer back = to_rgb(color_convert(rgb, space));
    for (std::size_t i = 0; i < rgb.samples().size(); ++i) ASSERT_NEAR(rgb.samples()[i], back.samples()[i], 1e-9);
  }
}

TEST(Resample, ConstantStaysConstant) {
  const ImageBuffer c(37, 21, 3, 0.3);
  for (auto m : {Interp::kNearest, Interp::kBilinear, Interp::kBicubic})
    for (auto [w, h] : {std::pair{10, 7}, std::pair{80, 50}}) {
      const ImageBuffer r = resample(c, w, h, m);
      for (double v : r.samples()) ASSERT_NEAR(v, 0.3, 1e-12);
    }
}

TEST(Resample, NearestToOnePixel) {
  ImageBuffer img(5, 3, 1);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) img.at(x, y, 0) = (10 * y + x) / 100.0;
  // floor((0 + 0.5) * 5 / 1) = 2, floor(0.5 * 3) = 1
  const ImageBuffer one = resample(img, 1, 1, Interp::kNearest);
  EXPECT_DOUBLE_EQ(one.at(0, 0, 0), img.at(2, 1, 0));
}

TEST(Resample, IdentityNearest) {
  const ImageBuffer img = random_rgb(13, 9, 5);
  EXPECT_EQ(resample(img, 13, 9, Interp::kNearest), img);
}

TEST(Resample, ResizeAndCrop) {
  EXPECT_EQ(resize_and_crop(ImageBuffer(1024, 768, 3, 0.5)).width(), 512);
  EXPECT_EQ(resize_and_crop(ImageBuffer(1024, 768, 3, 0.5)).height(), 384);
  const ImageBuffer wide = resize_and_crop(ImageBuffer(1536, 768, 3, 0.5));
  EXPECT_EQ(wide.width(), 512);
  EXPECT_EQ(wide.height(), 384);
  const ImageBuffer same = random_rgb(512, 384, 6);
  EXPECT_EQ(resize_and_crop(same), same);
}

TEST(Resample, WideInputKeepsCentre) {
  // 1536x768 -> 768x384 -> crop columns 128..639 of the half-size image
  ImageBuffer img(1536, 768, 1);
  for (int y = 0; y < 768; ++y)
    for (int x = 0; x < 1536; ++x) img.at(x, y, 0) = x < 768 ? 0.2 : 0.8;
  const ImageBuffer out = resize_and_crop(img, 512, 384, Interp::kNearest);
  EXPECT_DOUBLE_EQ(out.at(0, 100, 0), 0.2);
  EXPECT_DOUBLE_EQ(out.at(511, 100, 0), 0.8);
  EXPECT_DOUBLE_EQ(out.at(255, 0, 0), 0.2);
  EXPECT_DOUBLE_EQ(out.at(256, 0, 0), 0.8);
}

TEST(Convolve, ConstantAndDelta) {
  const ImageBuffer c(9, 7, 1, 0.25);
  const ImageBuffer blurred = convolve(c, gaussian_kernel(1.5));
  for (double v : blurred.samples()) ASSERT_NEAR(v, 0.25, 1e-15);
  Kernel2D delta{3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0}};
  const ImageBuffer img = random_rgb(8, 6, 7);
  EXPECT_EQ(convolve(img, delta), img);
}

TEST(Convolve, BoxOnRampMatchesBruteForce) {
  ImageBuffer ramp(5, 5, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) ramp.at(x, y, 0) = (x + 5 * y) / 24.0;
  const ImageBuffer out = convolve(ramp, box_kernel(3));
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, 4), sy = std::clamp(y + dy, 0, 4);
          acc += ramp.at(sx, sy, 0) / 9.0;
        }
      EXPECT_NEAR(out.at(x, y, 0), acc, 1e-15);
    }
  // interior: the 3x3 mean of a linear ramp is its centre value
  EXPECT_NEAR(out.at(2, 2, 0), 12.0 / 24.0, 1e-15);
}

TEST(Convolve, SeparableMatchesFull) {
  const ImageBuffer img = random_rgb(20, 15, 8);
  const auto taps = gaussian_taps(1.2);
  const Kernel2D k = gaussian_kernel(1.2);
  const ImageBuffer a = convolve(img, k);
  const ImageBuffer b = convolve_separable(img, taps, taps);
  for (std::size_t i = 0; i < a.samples().size(); ++i) ASSERT_NEAR(a.samples()[i], b.samples()[i], 1e-12);
}

TEST(Kernels, UnitSum) {
  EXPECT_NEAR(disk_kernel(3.3).sum(), 1.0, 1e-12);
  EXPECT_NEAR(line_kernel(9, 30).sum(), 1.0, 1e-12);
  EXPECT_NEAR(gaussian_kernel(1.5, 11).sum(), 1.0, 1e-12);
}

TEST(Border, Modes) {
  EXPECT_EQ(border_index(-1, 5, Border::kReplicate), 0);
  EXPECT_EQ(border_index(6, 5, Border::kReplicate), 4);
  // half-sample symmetric: the edge sample repeats
  EXPECT_EQ(border_index(-1, 5, Border::kReflect), 0);
  EXPECT_EQ(border_index(-2, 5, Border::kReflect), 1);
  EXPECT_EQ(border_index(5, 5, Border::kReflect), 4);
  EXPECT_EQ(border_index(6, 5, Border::kReflect), 3);
}

TEST(Image, RejectsNonFinite) {
  EXPECT_THROW(ImageBuffer(2, 2, 1, std::vector<double>{0, 1, NAN, 0}), Error);
  EXPECT_THROW(ImageBuffer(0, 2, 1), Error);
}

TEST(ImageIo, PngRoundTripIsQuantized) {
  const ImageBuffer img = random_rgb(17, 11, 9);
  const auto path = std::filesystem::temp_directory_path() / "iqa_test_roundtrip.png";
  write_png(img, path);
  const ImageBuffer back = read_image(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back, quantize_u8(img));
}

TEST(ImageIo, JpegDecodes) {
  const ImageBuffer img(32, 32, 3, 0.5);
  const ImageBuffer back = decode_jpeg(encode_jpeg(img, 90));
  ASSERT_EQ(back.width(), 32);
  for (double v : back.samples()) ASSERT_NEAR(v, 0.5, 2.0 / 255);
}

TEST(ImageIo, MissingFileIsIoError) {
  try {
    read_image("/nonexistent/x.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

}  // namespace
}  // namespace iqa
