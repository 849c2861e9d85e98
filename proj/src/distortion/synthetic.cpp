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

#include "iqa/distortion.hpp"
#include "iqa/error.hpp"
#include "iqa/rng.hpp"

namespace iqa {

namespace {

std::array<double, 3> random_color(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

}  // namespace

ImageBuffer synthetic_reference(int width, int height, std::uint64_t seed) {
  require(width > 0 && height > 0, "synthetic image dims must be positive");
  Rng rng(splitmix64(seed));
  ImageBuffer img(width, height, 3);

  // Smooth two-color background ramp.
  const auto c0 = random_color(rng, 0.15, 0.85);
  const auto c1 = random_color(rng, 0.15, 0.85);
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double ux = std::cos(theta), uy = std::sin(theta);
  const double span = std::abs(ux) * width + std::abs(uy) * height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = std::clamp(0.5 + (ux * (x - 0.5 * width) + uy * (y - 0.5 * height)) / span, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = (1 - t) * c0[c] + t * c1[c];
    }

  // Ellipses and rectangles with anti-aliased (2x2 supersampled) edges.
  const int shapes = 10 + static_cast<int>(rng.below(8));
  const double scale = std::min(width, height);
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = rng.uniform() < 0.5;
    const double cx = rng.uniform(0.0, width);
    const double cy = rng.uniform(0.0, height);
    const double rx = rng.uniform(0.04, 0.25) * scale;
    const double ry = rng.uniform(0.04, 0.25) * scale;
    const double rot = rng.uniform(0.0, std::numbers::pi);
    const auto color = random_color(rng, 0.05, 0.95);
    const double alpha = rng.uniform(0.6, 1.0);
    const double cr = std::cos(rot), sr = std::sin(rot);
    const double reach = std::max(rx, ry) * 1.5;
    const int x0 = std::max(0, static_cast<int>(cx - reach)), x1 = std::min(width - 1, static_cast<int>(cx + reach));
    const int y0 = std::max(0, static_cast<int>(cy - reach)), y1 = std::min(height - 1, static_cast<int>(cy + reach));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        int inside = 0;
        for (int sy = 0; sy < 2; ++sy)
          for (int sx = 0; sx < 2; ++sx) {
            const double px = x + 0.25 + 0.5 * sx - cx;
            const double py = y + 0.25 + 0.5 * sy - cy;
            const double u = (cr * px + sr * py) / rx;
            const double v = (-sr * px + cr * py) / ry;
            if (ellipse ? (u * u + v * v <= 1.0) : (std::abs(u) <= 1.0 && std::abs(v) <= 1.0)) ++inside;
          }
        const double a = alpha * inside / 4.0;
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = (1 - a) * img.at(x, y, c) + a * color[c];
      }
  }

  // A few sinusoidal gratings inside soft windows.
  const int gratings = 2 + static_cast<int>(rng.below(3));
  for (int g = 0; g < gratings; ++g) {
    const double cx = rng.uniform(0.0, width);
    const double cy = rng.uniform(0.0, height);
    const double radius = rng.uniform(0.08, 0.2) * scale;
    const double freq = rng.uniform(0.08, 0.45);
    const double dir = rng.uniform(0.0, std::numbers::pi);
    const double amp = rng.uniform(0.08, 0.2);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double win = std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius));
        if (win < 1e-3) continue;
        const double wave = amp * win * std::sin(freq * (std::cos(dir) * dx + std::sin(dir) * dy));
        for (int c = 0; c < 3; ++c) img.at(x, y, c) += wave;
      }
  }

  // Fine texture: lightly smoothed noise.
  ImageBuffer grain(width, height, 1);
  for (double& v : grain.samples()) v = rng.normal(0.0, 0.04);
  const auto taps = gaussian_taps(0.7);
  grain = convolve_separable(grain, taps, taps, Border::kReplicate);
  for (int c = 0; c < 3; ++c) {
    auto p = img.plane(c);
    const auto gp = grain.plane(0);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += gp[i];
  }
  img.clamp01();
  return quantize_u8(img);
}

}  // namespace iqa
