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
#include <numbers>
#include <string>

#include "internal.hpp"
#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/rng.hpp"

namespace iqa {

namespace {

using detail::dither_to_palette;
using detail::gradient_magnitude;
using detail::median_filter;
using detail::minimum_variance_palette;

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  const auto taps = gaussian_taps(sigma);
  return convolve_separable(img, taps, taps, Border::kReplicate);
}

// Blurs the chosen Lab planes, returns RGB.
ImageBuffer blur_lab_chroma(const ImageBuffer& img, double sigma) {
  ImageBuffer lab = color_convert(img, ColorSpace::kLab);
  const auto taps = gaussian_taps(sigma);
  for (int c = 1; c <= 2; ++c) {
    const ImageBuffer blurred = convolve_separable(lab.channel(c), taps, taps, Border::kReplicate);
    std::copy(blurred.plane(0).begin(), blurred.plane(0).end(), lab.plane(c).begin());
  }
  return to_rgb(lab);
}

ImageBuffer color_shift(const ImageBuffer& img, double offset, Rng& rng) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const int dx = static_cast<int>(std::lround(offset * std::cos(angle)));
  const int dy = static_cast<int>(std::lround(offset * std::sin(angle)));
  auto mask = gradient_magnitude(img);
  const double peak = *std::max_element(mask.begin(), mask.end());
  for (double& m : mask) m = peak > 0.0 ? m / peak : 0.0;
  ImageBuffer out = img;
  const int w = img.width();
  const int h = img.height();
  const auto green = img.plane(1);
  auto dst = out.plane(1);
  for (int y = 0; y < h; ++y) {
    const int sy = std::clamp(y - dy, 0, h - 1);
    for (int x = 0; x < w; ++x) {
      const int sx = std::clamp(x - dx, 0, w - 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double shifted = green[static_cast<std::size_t>(sy) * w + sx];
      dst[i] = green[i] + mask[i] * (shifted - green[i]);
    }
  }
  return out;
}

ImageBuffer scale_saturation_hsv(const ImageBuffer& img, double factor) {
  ImageBuffer hsv = color_convert(img, ColorSpace::kHSV);
  for (double& s : hsv.plane(1)) s = std::clamp(s * factor, 0.0, 1.0);
  return to_rgb(hsv);
}

ImageBuffer scale_chroma_lab(const ImageBuffer& img, double factor) {
  ImageBuffer lab = color_convert(img, ColorSpace::kLab);
  for (int c = 1; c <= 2; ++c)
    for (double& v : lab.plane(c)) v *= factor;
  return to_rgb(lab);
}

ImageBuffer add_gaussian_noise(ImageBuffer img, double sigma, Rng& rng) {
  for (double& v : img.samples()) v += rng.normal(0.0, sigma);
  img.clamp01();
  return img;
}

ImageBuffer noise_in_ycbcr(const ImageBuffer& img, double sigma, Rng& rng) {
  ImageBuffer ycc = color_convert(img, ColorSpace::kYCbCr);
  for (double& v : ycc.samples()) v += rng.normal(0.0, sigma);
  return to_rgb(ycc);
}

ImageBuffer impulse_noise(ImageBuffer img, double density, Rng& rng) {
  for (double& v : img.samples()) {
    if (rng.uniform() < density) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }
  return img;
}

ImageBuffer speckle_noise(ImageBuffer img, double sigma, Rng& rng) {
  for (double& v : img.samples()) v += v * rng.normal(0.0, sigma);
  img.clamp01();
  return img;
}

// L' = L +/- a sin(pi L) on normalized Lab lightness; 0 and 1 stay fixed.
ImageBuffer adjust_lightness(const ImageBuffer& img, double amplitude) {
  ImageBuffer lab = color_convert(img, ColorSpace::kLab);
  for (double& v : lab.plane(0)) {
    const double l = std::clamp(v / 100.0, 0.0, 1.0);
    v = 100.0 * std::clamp(l + amplitude * std::sin(std::numbers::pi * l), 0.0, 1.0);
  }
  return to_rgb(lab);
}

ImageBuffer mean_shift(ImageBuffer img, double shift) {
  for (double& v : img.samples()) v += shift;
  img.clamp01();
  return img;
}

ImageBuffer jitter(const ImageBuffer& img, double amount, Rng& rng) {
  const int w = img.width();
  const int h = img.height();
  ImageBuffer out(w, h, img.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = x + rng.uniform(-amount, amount);
      const double sy = y + rng.uniform(-amount, amount);
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = sample_bicubic(img.plane(c), w, h, sx, sy);
    }
  }
  out.clamp01();
  return out;
}

ImageBuffer displace_patches(const ImageBuffer& img, int count, int patch, int max_disp, Rng& rng) {
  const int w = img.width();
  const int h = img.height();
  ImageBuffer out = img;
  const int ps = std::min({patch, w, h});
  for (int n = 0; n < count; ++n) {
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - ps + 1)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(h - ps + 1)));
    int dx = 0, dy = 0;
    while (dx == 0 && dy == 0) {
      dx = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * max_disp + 1))) - max_disp;
      dy = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * max_disp + 1))) - max_disp;
    }
    const int tx = std::clamp(x0 + dx, 0, w - ps);
    const int ty = std::clamp(y0 + dy, 0, h - ps);
    for (int c = 0; c < img.channels(); ++c)
      for (int y = 0; y < ps; ++y)
        for (int x = 0; x < ps; ++x) out.at(tx + x, ty + y, c) = img.at(x0 + x, y0 + y, c);
  }
  return out;
}

ImageBuffer pixelate(const ImageBuffer& img, double block) {
  const int w = img.width();
  const int h = img.height();
  const int sw = std::max(1, static_cast<int>(std::lround(w / block)));
  const int sh = std::max(1, static_cast<int>(std::lround(h / block)));
  return resample(resample(img, sw, sh, Interp::kNearest), w, h, Interp::kNearest);
}

ImageBuffer otsu_quantize(const ImageBuffer& img, int count, std::vector<std::string>* warnings) {
  const auto thresholds = otsu_thresholds(img.samples(), count);
  if (thresholds.empty()) {
    if (warnings) warnings->push_back("quantization: image has a single intensity level, returned unchanged");
    return img;
  }
  auto klass = [&](double v) {
    return static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin());
  };
  // Classify on the same 256-bin grid the thresholds were found on.
  auto binned = [](double v) { return std::clamp(std::floor(v * 256.0), 0.0, 255.0) / 256.0; };
  std::vector<double> sum(thresholds.size() + 1, 0.0), cnt(thresholds.size() + 1, 0.0);
  for (double v : img.samples()) {
    const auto k = klass(binned(v));
    sum[k] += v;
    cnt[k] += 1.0;
  }
  ImageBuffer out = img;
  for (double& v : out.samples()) {
    const auto k = klass(binned(v));
    v = sum[k] / cnt[k];
  }
  return out;
}

ImageBuffer color_blocks(const ImageBuffer& img, int count, int block, Rng& rng) {
  const int w = img.width();
  const int h = img.height();
  const int bw = std::min(block, w);
  const int bh = std::min(block, h);
  ImageBuffer out = img;
  for (int n = 0; n < count; ++n) {
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - bw + 1)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(h - bh + 1)));
    const std::array<double, 3> color = {rng.uniform(), rng.uniform(), rng.uniform()};
    for (int c = 0; c < img.channels(); ++c)
      for (int y = y0; y < y0 + bh; ++y)
        for (int x = x0; x < x0 + bw; ++x) out.at(x, y, c) = color[c];
  }
  return out;
}

ImageBuffer unsharp_mask(const ImageBuffer& img, double amount, double sigma) {
  ImageBuffer lab = color_convert(img, ColorSpace::kLab);
  const ImageBuffer lightness = lab.channel(0);
  const ImageBuffer blurred = gaussian_blur(lightness, sigma);
  auto l = lab.plane(0);
  for (std::size_t i = 0; i < l.size(); ++i)
    l[i] = std::clamp(l[i] + amount * (l[i] - blurred.plane(0)[i]), 0.0, 100.0);
  return to_rgb(lab);
}

// Sigmoid renormalized to fix 0 and 1; `increase` selects the curve or its inverse.
ImageBuffer contrast_sigmoid(ImageBuffer img, double gain, bool increase) {
  auto sig = [gain](double v) { return 1.0 / (1.0 + std::exp(-gain * (v - 0.5))); };
  const double s0 = sig(0.0);
  const double s1 = sig(1.0);
  for (double& v : img.samples()) {
    if (increase) {
      v = (sig(v) - s0) / (s1 - s0);
    } else {
      const double s = s0 + std::clamp(v, 0.0, 1.0) * (s1 - s0);
      v = 0.5 - std::log(1.0 / s - 1.0) / gain;
    }
  }
  img.clamp01();
  return img;
}

}  // namespace

ImageBuffer apply_distortion(const ImageBuffer& img, const DistortionSpec& spec, const DistortionParamTable& table,
                             std::vector<std::string>* warnings) {
  validate(spec);
  if (img.channels() != 3 || img.space() != ColorSpace::kRGB)
    fail(ErrorCode::kInvalidArgument, "distortions need a 3-channel RGB image");
  const double p = table.value(spec.kind, spec.level);
  Rng rng(spec.seed);

  ImageBuffer out;
  switch (spec.kind) {
    case DistortionKind::kGaussianBlur: out = gaussian_blur(img, p); break;
    case DistortionKind::kLensBlur: out = convolve(img, disk_kernel(p), Border::kReplicate); break;
    case DistortionKind::kMotionBlur:
      out = convolve(img, line_kernel(p, rng.uniform(0.0, 180.0)), Border::kReplicate);
      break;
    case DistortionKind::kColorDiffusion: out = blur_lab_chroma(img, p); break;
    case DistortionKind::kColorShift: out = color_shift(img, p, rng); break;
    case DistortionKind::kColorQuantization: {
      const int colors = std::max(2, static_cast<int>(std::lround(p)));
      out = dither_to_palette(img, minimum_variance_palette(img, colors));
      break;
    }
    case DistortionKind::kColorSaturation1: out = scale_saturation_hsv(img, p); break;
    case DistortionKind::kColorSaturation2: out = scale_chroma_lab(img, p); break;
    case DistortionKind::kJpeg2000: out = jpeg2000_roundtrip(img, p); break;
    case DistortionKind::kJpeg: out = jpeg_roundtrip(img, static_cast<int>(std::lround(p))); break;
    case DistortionKind::kWhiteNoise: out = add_gaussian_noise(img, p, rng); break;
    case DistortionKind::kWhiteNoiseColor: out = noise_in_ycbcr(img, p, rng); break;
    case DistortionKind::kImpulseNoise: out = impulse_noise(img, p, rng); break;
    case DistortionKind::kMultiplicativeNoise: out = speckle_noise(img, p, rng); break;
    case DistortionKind::kDenoise: {
      const int size = static_cast<int>(table.extra(spec.kind, "median_size"));
      out = median_filter(add_gaussian_noise(img, p, rng), size);
      break;
    }
    case DistortionKind::kBrighten: out = adjust_lightness(img, p); break;
    case DistortionKind::kDarken: out = adjust_lightness(img, -p); break;
    case DistortionKind::kMeanShift: out = mean_shift(img, p); break;
    case DistortionKind::kJitter: out = jitter(img, p, rng); break;
    case DistortionKind::kNonEccentricityPatch:
      out = displace_patches(img, static_cast<int>(std::lround(p)),
                             static_cast<int>(table.extra(spec.kind, "patch_size")),
                             static_cast<int>(table.extra(spec.kind, "max_displacement")), rng);
      break;
    case DistortionKind::kPixelate: out = pixelate(img, p); break;
    case DistortionKind::kQuantization: out = otsu_quantize(img, static_cast<int>(std::lround(p)), warnings); break;
    case DistortionKind::kColorBlock:
      out = color_blocks(img, static_cast<int>(std::lround(p)),
                         static_cast<int>(table.extra(spec.kind, "block_size")), rng);
      break;
    case DistortionKind::kHighSharpen: out = unsharp_mask(img, p, table.extra(spec.kind, "sigma")); break;
    case DistortionKind::kContrastChange: out = contrast_sigmoid(img, p, (spec.seed & 1U) == 0); break;
  }
  out.clamp01();
  return out;
}

}  // namespace iqa
