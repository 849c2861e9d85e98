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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

// Image containers, color conversions, resampling and convolution shared by
// the distortion engine and the full-reference metrics.
namespace iqa {

enum class ColorSpace { kRGB, kHSV, kLab, kYCbCr, kLuma };

std::string to_string(ColorSpace space);

// Planar raster of double samples. RGB, HSV, YCbCr and luma samples live in
// [0,1]; Lab keeps its native units (L in [0,100], a/b roughly [-128,127]).
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, double fill = 0.0,
              ColorSpace space = ColorSpace::kRGB);
  // `planar` holds channel 0 row-major, then channel 1, ...
  ImageBuffer(int width, int height, int channels, std::vector<double> planar,
              ColorSpace space = ColorSpace::kRGB);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  ColorSpace space() const noexcept { return space_; }
  void set_space(ColorSpace space) noexcept { space_ = space; }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t plane_size() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<double> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const { return {data_.data() + c * plane_size(), plane_size()}; }

  std::span<double> samples() noexcept { return data_; }
  std::span<const double> samples() const noexcept { return data_; }

  ImageBuffer channel(int c) const;

  void clamp01();

  friend bool operator==(const ImageBuffer& a, const ImageBuffer& b) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return static_cast<std::size_t>(c) * plane_size() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  ColorSpace space_ = ColorSpace::kRGB;
  std::vector<double> data_;
};

// ---- color -----------------------------------------------------------------

// BT.601 luma weights, used for metrics and the luma target space.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

// Converts an RGB image to `target`. A 1-channel image is accepted only for
// the luma target (identity). HSV hue is stored as a fraction of a turn.
// YCbCr is BT.601 full range with chroma centred on 0.5. Lab uses D65 and
// sRGB linearization.
ImageBuffer color_convert(const ImageBuffer& img, ColorSpace target);

// Inverse of color_convert for HSV, Lab and YCbCr images; RGB passes through.
// The result is clamped to [0,1].
ImageBuffer to_rgb(const ImageBuffer& img);

ImageBuffer luma(const ImageBuffer& img);

// ---- kernels and convolution -----------------------------------------------

struct Kernel2D {
  int width = 1;
  int height = 1;
  std::vector<double> weights{1.0};  // row-major

  double at(int x, int y) const { return weights[static_cast<std::size_t>(y) * width + x]; }
  double sum() const;
};

// Truncated at radius ceil(3 sigma), unit sum.
std::vector<double> gaussian_taps(double sigma);
Kernel2D gaussian_kernel(double sigma);
// Fixed-size Gaussian (e.g. the 11x11 SSIM window), unit sum.
Kernel2D gaussian_kernel(double sigma, int size);
// Uniform disk with area-weighted edge pixels, unit sum.
Kernel2D disk_kernel(double radius);
// Anti-aliased line of the given length through the centre, unit sum.
Kernel2D line_kernel(double length, double angle_degrees);
Kernel2D box_kernel(int size);

enum class Border { kReplicate, kReflect };

// Correlation with an odd-sized kernel; output has the input's dims.
ImageBuffer convolve(const ImageBuffer& img, const Kernel2D& kernel, Border border = Border::kReplicate);
// Row pass with `taps_x`, then column pass with `taps_y` (both odd length).
ImageBuffer convolve_separable(const ImageBuffer& img, std::span<const double> taps_x,
                               std::span<const double> taps_y, Border border = Border::kReplicate);

// Maps an out-of-range coordinate into [0, n).
int border_index(int i, int n, Border border) noexcept;

// ---- resampling ------------------------------------------------------------

enum class Interp { kNearest, kBilinear, kBicubic };

// Pixel-centre aligned grid: destination x maps to source (x + 0.5) * sw / dw - 0.5.
// Nearest picks source index floor((x + 0.5) * sw / dw). Linear and cubic
// filters widen their support when shrinking. Output is clamped to [0,1]
// for RGB-like spaces.
ImageBuffer resample(const ImageBuffer& img, int new_width, int new_height, Interp method);

// Scale so the image spans the target while keeping the pixel aspect ratio,
// then centre-crop the overflowing dimension.
ImageBuffer resize_and_crop(const ImageBuffer& img, int target_width = 512, int target_height = 384,
                            Interp method = Interp::kBicubic);

// Keys cubic (a = -0.5) sample at a fractional position, replicate border.
double sample_bicubic(std::span<const double> plane, int width, int height, double x, double y);

// ---- I/O -------------------------------------------------------------------

// Reads PNG or JPEG (by signature) as 3-channel RGB; gray input is replicated.
ImageBuffer read_image(const std::filesystem::path& path);
void write_png(const ImageBuffer& img, const std::filesystem::path& path, int compression_level = 1);

std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality);
ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes);

std::uint8_t to_u8(double v) noexcept;
inline double from_u8(std::uint8_t v) noexcept { return v / 255.0; }

// Rounds every sample through 8 bits, as a PNG round-trip would.
ImageBuffer quantize_u8(const ImageBuffer& img);

}  // namespace iqa
