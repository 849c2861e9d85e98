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
#include <array>
#include <cmath>
#include <string>

#include "iqa/error.hpp"
#include "iqa/imgcore.hpp"

namespace iqa {

std::string to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::kRGB: return "RGB";
    case ColorSpace::kHSV: return "HSV";
    case ColorSpace::kLab: return "Lab";
    case ColorSpace::kYCbCr: return "YCbCr";
    case ColorSpace::kLuma: return "Luma";
  }
  return "?";
}

ImageBuffer::ImageBuffer(int width, int height, int channels, double fill, ColorSpace space)
    : width_(width), height_(height), channels_(channels), space_(space) {
  require(width > 0 && height > 0, "image dims must be positive");
  require(channels == 1 || channels == 3, "image must have 1 or 3 channels");
  data_.assign(plane_size() * static_cast<std::size_t>(channels), fill);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<double> planar, ColorSpace space)
    : width_(width), height_(height), channels_(channels), space_(space), data_(std::move(planar)) {
  require(width > 0 && height > 0, "image dims must be positive");
  require(channels == 1 || channels == 3, "image must have 1 or 3 channels");
  require(data_.size() == plane_size() * static_cast<std::size_t>(channels),
          "sample count " + std::to_string(data_.size()) + " does not match " + std::to_string(width) + "x" +
              std::to_string(height) + "x" + std::to_string(channels));
  require(std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); }),
          "image samples must be finite");
}

ImageBuffer ImageBuffer::channel(int c) const {
  require(c >= 0 && c < channels_, "channel index out of range");
  const auto p = plane(c);
  return ImageBuffer(width_, height_, 1, std::vector<double>(p.begin(), p.end()), ColorSpace::kLuma);
}

void ImageBuffer::clamp01() {
  for (double& v : data_) v = std::clamp(v, 0.0, 1.0);
}

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

constexpr Mat3 kRgbToXyz = {{{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}}};
constexpr std::array<double, 3> kWhiteD65 = {0.95047, 1.0, 1.08883};

Mat3 invert(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return r;
}

const Mat3& xyz_to_rgb() {
  static const Mat3 inv = invert(kRgbToXyz);
  return inv;
}

double srgb_to_linear_exact(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

// 8-bit sample values hit a table holding the same results.
double srgb_to_linear(double c) {
  static const auto table = [] {
    std::array<double, 256> t{};
    for (int k = 0; k < 256; ++k) t[k] = srgb_to_linear_exact(k / 255.0);
    return t;
  }();
  const double scaled = c * 255.0;
  if (scaled >= 0.0 && scaled <= 255.0) {
    const int k = static_cast<int>(scaled + 0.5);
    if (k / 255.0 == c) return table[k];
  }
  return srgb_to_linear_exact(c);
}
double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(std::max(c, 0.0), 1.0 / 2.4) - 0.055;
}

constexpr double kLabDelta = 6.0 / 29.0;
double lab_f(double t) {
  return t > kLabDelta * kLabDelta * kLabDelta ? std::cbrt(t) : t / (3.0 * kLabDelta * kLabDelta) + 4.0 / 29.0;
}
double lab_finv(double f) {
  return f > kLabDelta ? f * f * f : 3.0 * kLabDelta * kLabDelta * (f - 4.0 / 29.0);
}

std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0.0) {
    if (mx == r) {
      h = std::fmod((g - b) / d, 6.0);
      if (h < 0.0) h += 6.0;
    } else if (mx == g) {
      h = (b - r) / d + 2.0;
    } else {
      h = (r - g) / d + 4.0;
    }
    h /= 6.0;
  }
  const double s = mx > 0.0 ? d / mx : 0.0;
  return {h, s, mx};
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  const double h6 = (h - std::floor(h)) * 6.0;
  const int sector = static_cast<int>(std::floor(h6)) % 6;
  const double f = h6 - std::floor(h6);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

std::array<double, 3> rgb_to_lab(double r, double g, double b) {
  const std::array<double, 3> lin = {srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b)};
  std::array<double, 3> f{};
  for (int i = 0; i < 3; ++i) {
    const double xyz = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
    f[i] = lab_f(xyz / kWhiteD65[i]);
  }
  return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

std::array<double, 3> lab_to_rgb(double l, double a, double bb) {
  const double fy = (l + 16.0) / 116.0;
  const std::array<double, 3> xyz = {kWhiteD65[0] * lab_finv(fy + a / 500.0), kWhiteD65[1] * lab_finv(fy),
                                     kWhiteD65[2] * lab_finv(fy - bb / 200.0)};
  const Mat3& m = xyz_to_rgb();
  std::array<double, 3> rgb{};
  for (int i = 0; i < 3; ++i) rgb[i] = linear_to_srgb(m[i][0] * xyz[0] + m[i][1] * xyz[1] + m[i][2] * xyz[2]);
  return rgb;
}

std::array<double, 3> rgb_to_ycbcr(double r, double g, double b) {
  return {kLumaR * r + kLumaG * g + kLumaB * b, 0.5 - 0.168735892 * r - 0.331264108 * g + 0.5 * b,
          0.5 + 0.5 * r - 0.418687589 * g - 0.081312411 * b};
}

std::array<double, 3> ycbcr_to_rgb(double y, double cb, double cr) {
  const double u = cb - 0.5;
  const double v = cr - 0.5;
  return {y + 1.402 * v, y - 0.344136286 * u - 0.714136286 * v, y + 1.772 * u};
}

template <typename Fn>
ImageBuffer map_pixels(const ImageBuffer& img, ColorSpace out_space, Fn&& fn) {
  ImageBuffer out(img.width(), img.height(), 3, 0.0, out_space);
  const auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto o0 = out.plane(0), o1 = out.plane(1), o2 = out.plane(2);
  for (std::size_t i = 0; i < img.plane_size(); ++i) {
    const auto v = fn(r[i], g[i], b[i]);
    o0[i] = v[0];
    o1[i] = v[1];
    o2[i] = v[2];
  }
  return out;
}

}  // namespace

ImageBuffer luma(const ImageBuffer& img) {
  if (img.channels() == 1) {
    ImageBuffer out = img;
    out.set_space(ColorSpace::kLuma);
    return out;
  }
  require(img.space() == ColorSpace::kRGB, "luma expects an RGB image, got " + to_string(img.space()));
  ImageBuffer out(img.width(), img.height(), 1, 0.0, ColorSpace::kLuma);
  const auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto y = out.plane(0);
  for (std::size_t i = 0; i < img.plane_size(); ++i) y[i] = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
  return out;
}

ImageBuffer color_convert(const ImageBuffer& img, ColorSpace target) {
  if (target == ColorSpace::kLuma) return luma(img);
  if (img.channels() != 3)
    fail(ErrorCode::kInvalidArgument,
         "color_convert to " + to_string(target) + " needs 3 channels, got " + std::to_string(img.channels()));
  require(img.space() == ColorSpace::kRGB, "color_convert expects RGB input, got " + to_string(img.space()));
  switch (target) {
    case ColorSpace::kRGB: return img;
    case ColorSpace::kHSV: return map_pixels(img, target, rgb_to_hsv);
    case ColorSpace::kLab: return map_pixels(img, target, rgb_to_lab);
    case ColorSpace::kYCbCr: return map_pixels(img, target, rgb_to_ycbcr);
    case ColorSpace::kLuma: break;
  }
  fail(ErrorCode::kUnsupported, "unsupported color space");
}

ImageBuffer to_rgb(const ImageBuffer& img) {
  ImageBuffer out;
  switch (img.space()) {
    case ColorSpace::kRGB: out = img; break;
    case ColorSpace::kHSV: out = map_pixels(img, ColorSpace::kRGB, hsv_to_rgb); break;
    case ColorSpace::kLab: out = map_pixels(img, ColorSpace::kRGB, lab_to_rgb); break;
    case ColorSpace::kYCbCr: out = map_pixels(img, ColorSpace::kRGB, ycbcr_to_rgb); break;
    case ColorSpace::kLuma:
      fail(ErrorCode::kUnsupported, "luma has no inverse conversion to RGB");
  }
  out.clamp01();
  return out;
}

std::uint8_t to_u8(double v) noexcept {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

ImageBuffer quantize_u8(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (double& v : out.samples()) v = from_u8(to_u8(v));
  return out;
}

}  // namespace iqa
