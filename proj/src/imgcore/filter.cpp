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
#include <numeric>
#include <string>

#include "iqa/error.hpp"
#include "iqa/imgcore.hpp"

namespace iqa {

double Kernel2D::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

namespace {

void normalize(std::vector<double>& w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
}

Kernel2D delta_kernel() { return Kernel2D{}; }

// Lookup table for indices i + offset, offset in [-radius, radius].
std::vector<int> index_table(int n, int radius, Border border) {
  std::vector<int> table(static_cast<std::size_t>(n + 2 * radius));
  for (int i = -radius; i < n + radius; ++i) table[i + radius] = border_index(i, n, border);
  return table;
}

}  // namespace

int border_index(int i, int n, Border border) noexcept {
  if (i >= 0 && i < n) return i;
  if (border == Border::kReplicate) return std::clamp(i, 0, n - 1);
  // Half-sample symmetric: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

std::vector<double> gaussian_taps(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i) taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  normalize(taps);
  return taps;
}

Kernel2D gaussian_kernel(double sigma) {
  const auto taps = gaussian_taps(sigma);
  const int n = static_cast<int>(taps.size());
  Kernel2D k{n, n, std::vector<double>(taps.size() * taps.size())};
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) k.weights[y * n + x] = taps[y] * taps[x];
  normalize(k.weights);
  return k;
}

Kernel2D gaussian_kernel(double sigma, int size) {
  require(size > 0 && size % 2 == 1, "gaussian window size must be odd");
  require(sigma > 0.0, "gaussian sigma must be positive");
  const int r = size / 2;
  Kernel2D k{size, size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) k.weights[(y + r) * size + (x + r)] = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
  normalize(k.weights);
  return k;
}

Kernel2D disk_kernel(double radius) {
  if (radius <= 0.0) return delta_kernel();
  const int r = static_cast<int>(std::ceil(radius));
  const int n = 2 * r + 1;
  constexpr int kSub = 16;
  Kernel2D k{n, n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      int inside = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        const double py = y - 0.5 + (sy + 0.5) / kSub;
        for (int sx = 0; sx < kSub; ++sx) {
          const double px = x - 0.5 + (sx + 0.5) / kSub;
          if (px * px + py * py <= radius * radius) ++inside;
        }
      }
      k.weights[(y + r) * n + (x + r)] = static_cast<double>(inside) / (kSub * kSub);
    }
  }
  normalize(k.weights);
  return k;
}

Kernel2D line_kernel(double length, double angle_degrees) {
  if (length <= 1.0) return delta_kernel();
  const double half = 0.5 * (length - 1.0);
  const int r = static_cast<int>(std::ceil(half)) + 1;
  const int n = 2 * r + 1;
  Kernel2D k{n, n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  const double theta = angle_degrees * std::numbers::pi / 180.0;
  const double dx = std::cos(theta);
  const double dy = -std::sin(theta);  // image rows grow downwards
  const int samples = static_cast<int>(std::ceil(length * 16.0)) + 1;
  for (int s = 0; s < samples; ++s) {
    const double t = -half + (2.0 * half) * s / (samples - 1);
    const double px = r + t * dx;
    const double py = r + t * dy;
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const double fx = px - x0;
    const double fy = py - y0;
    k.weights[y0 * n + x0] += (1 - fx) * (1 - fy);
    k.weights[y0 * n + x0 + 1] += fx * (1 - fy);
    k.weights[(y0 + 1) * n + x0] += (1 - fx) * fy;
    k.weights[(y0 + 1) * n + x0 + 1] += fx * fy;
  }
  normalize(k.weights);
  return k;
}

Kernel2D box_kernel(int size) {
  require(size > 0 && size % 2 == 1, "box kernel size must be odd");
  const auto count = static_cast<std::size_t>(size) * size;
  return Kernel2D{size, size, std::vector<double>(count, 1.0 / static_cast<double>(count))};
}

ImageBuffer convolve(const ImageBuffer& img, const Kernel2D& kernel, Border border) {
  if (kernel.width % 2 == 0 || kernel.height % 2 == 0)
    fail(ErrorCode::kInvalidArgument, "kernel dims must be odd, got " + std::to_string(kernel.width) + "x" +
                                          std::to_string(kernel.height));
  require(kernel.weights.size() == static_cast<std::size_t>(kernel.width) * kernel.height,
          "kernel weight count does not match its dims");
  const int rx = kernel.width / 2;
  const int ry = kernel.height / 2;
  const int w = img.width();
  const int h = img.height();
  struct Tap {
    int dx, dy;
    double w;
  };
  std::vector<Tap> taps;
  for (int y = 0; y < kernel.height; ++y)
    for (int x = 0; x < kernel.width; ++x)
      if (kernel.at(x, y) != 0.0) taps.push_back({x - rx, y - ry, kernel.at(x, y)});
  const auto xs = index_table(w, rx, border);
  const auto ys = index_table(h, ry, border);
  // Summing offsets from the centre sample keeps constant regions exact for
  // smoothing kernels; `scale` restores sum(w) * centre for the others.
  const double ksum = kernel.sum();
  const double scale = std::abs(ksum - 1.0) < 1e-9 ? 1.0 : ksum;

  ImageBuffer out(w, h, img.channels(), 0.0, img.space());
  std::vector<double> acc(static_cast<std::size_t>(w));
  for (int c = 0; c < img.channels(); ++c) {
    const auto src = img.plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < h; ++y) {
      const double* centre = src.data() + static_cast<std::size_t>(y) * w;
      std::fill(acc.begin(), acc.end(), 0.0);
      // Tap-major accumulation: each pixel still sums its taps in kernel order.
      for (const Tap& t : taps) {
        const double* srow = src.data() + static_cast<std::size_t>(ys[y + t.dy + ry]) * w;
        const int lo = std::clamp(-t.dx, 0, w), hi = std::clamp(w - t.dx, 0, w);
        for (int x = 0; x < lo; ++x) acc[x] += t.w * (srow[xs[x + t.dx + rx]] - centre[x]);
        for (int x = lo; x < hi; ++x) acc[x] += t.w * (srow[x + t.dx] - centre[x]);
        for (int x = std::max(hi, lo); x < w; ++x) acc[x] += t.w * (srow[xs[x + t.dx + rx]] - centre[x]);
      }
      double* drow = dst.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) drow[x] = scale * centre[x] + acc[x];
    }
  }
  return out;
}

ImageBuffer convolve_separable(const ImageBuffer& img, std::span<const double> taps_x,
                               std::span<const double> taps_y, Border border) {
  require(taps_x.size() % 2 == 1 && taps_y.size() % 2 == 1, "separable taps must have odd length");
  const int rx = static_cast<int>(taps_x.size() / 2);
  const int ry = static_cast<int>(taps_y.size() / 2);
  const int w = img.width();
  const int h = img.height();
  const auto xs = index_table(w, rx, border);
  const auto ys = index_table(h, ry, border);
  auto unit_scale = [](std::span<const double> taps) {
    const double s = std::accumulate(taps.begin(), taps.end(), 0.0);
    return std::abs(s - 1.0) < 1e-9 ? 1.0 : s;
  };
  const double scale_x = unit_scale(taps_x);
  const double scale_y = unit_scale(taps_y);

  ImageBuffer out(w, h, img.channels(), 0.0, img.space());
  std::vector<double> tmp(img.plane_size());
  for (int c = 0; c < img.channels(); ++c) {
    const auto src = img.plane(c);
    for (int y = 0; y < h; ++y) {
      const double* row = src.data() + static_cast<std::size_t>(y) * w;
      double* trow = tmp.data() + static_cast<std::size_t>(y) * w;
      auto edge = [&](int x) {
        const double centre = row[x];
        double acc = 0.0;
        for (int k = -rx; k <= rx; ++k) acc += taps_x[k + rx] * (row[xs[x + k + rx]] - centre);
        trow[x] = scale_x * centre + acc;
      };
      const int lo = std::min(rx, w);
      const int hi = std::max(lo, w - rx);
      for (int x = 0; x < lo; ++x) edge(x);
      std::fill(trow + lo, trow + hi, 0.0);
      for (int k = 0; k <= 2 * rx; ++k) {
        const double tk = taps_x[k];
        const double* shifted = row + k - rx;
        for (int x = lo; x < hi; ++x) trow[x] += tk * (shifted[x] - row[x]);
      }
      for (int x = lo; x < hi; ++x) trow[x] = scale_x * row[x] + trow[x];
      for (int x = hi; x < w; ++x) edge(x);
    }
    auto dst = out.plane(c);
    for (int y = 0; y < h; ++y) {
      double* drow = dst.data() + static_cast<std::size_t>(y) * w;
      const double* centre = tmp.data() + static_cast<std::size_t>(y) * w;
      for (int k = -ry; k <= ry; ++k) {
        const double wk = taps_y[k + ry];
        const double* trow = tmp.data() + static_cast<std::size_t>(ys[y + k + ry]) * w;
        for (int x = 0; x < w; ++x) drow[x] += wk * (trow[x] - centre[x]);
      }
      for (int x = 0; x < w; ++x) drow[x] += scale_y * centre[x];
    }
  }
  return out;
}

}  // namespace iqa
