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
#include <string>

#include "iqa/error.hpp"
#include "iqa/imgcore.hpp"

namespace iqa {

namespace {

double cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

double triangle(double x) {
  x = std::abs(x);
  return x < 1.0 ? 1.0 - x : 0.0;
}

struct Contribution {
  std::vector<int> index;
  std::vector<double> weight;
};

// Per-destination source indices and weights along one axis.
std::vector<Contribution> contributions(int src, int dst, Interp method) {
  std::vector<Contribution> out(static_cast<std::size_t>(dst));
  const double ratio = static_cast<double>(src) / dst;
  if (method == Interp::kNearest) {
    for (int i = 0; i < dst; ++i) {
      const int j = std::min(src - 1, static_cast<int>(std::floor((i + 0.5) * ratio)));
      out[i].index = {j};
      out[i].weight = {1.0};
    }
    return out;
  }
  const double support = method == Interp::kBicubic ? 2.0 : 1.0;
  const double kscale = std::min(1.0, static_cast<double>(dst) / src);
  const double width = support / kscale;
  for (int i = 0; i < dst; ++i) {
    const double u = (i + 0.5) * ratio - 0.5;
    const int lo = static_cast<int>(std::floor(u - width));
    const int hi = static_cast<int>(std::ceil(u + width));
    Contribution& c = out[i];
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double d = (u - j) * kscale;
      const double w = method == Interp::kBicubic ? cubic(d) : triangle(d);
      if (w == 0.0) continue;
      c.index.push_back(std::clamp(j, 0, src - 1));
      c.weight.push_back(w);
      sum += w;
    }
    for (double& w : c.weight) w /= sum;
  }
  return out;
}

}  // namespace

ImageBuffer resample(const ImageBuffer& img, int new_width, int new_height, Interp method) {
  require(new_width > 0 && new_height > 0, "resample target dims must be positive");
  const int w = img.width();
  const int h = img.height();
  const auto cx = contributions(w, new_width, method);
  const auto cy = contributions(h, new_height, method);

  ImageBuffer out(new_width, new_height, img.channels(), 0.0, img.space());
  std::vector<double> tmp(static_cast<std::size_t>(new_width) * h);
  for (int c = 0; c < img.channels(); ++c) {
    const auto src = img.plane(c);
    for (int y = 0; y < h; ++y) {
      const double* row = src.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < new_width; ++x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < cx[x].index.size(); ++k) acc += cx[x].weight[k] * row[cx[x].index[k]];
        tmp[static_cast<std::size_t>(y) * new_width + x] = acc;
      }
    }
    auto dst = out.plane(c);
    for (int y = 0; y < new_height; ++y) {
      double* drow = dst.data() + static_cast<std::size_t>(y) * new_width;
      for (std::size_t k = 0; k < cy[y].index.size(); ++k) {
        const double wk = cy[y].weight[k];
        const double* trow = tmp.data() + static_cast<std::size_t>(cy[y].index[k]) * new_width;
        for (int x = 0; x < new_width; ++x) drow[x] += wk * trow[x];
      }
    }
  }
  if (img.space() != ColorSpace::kLab) out.clamp01();
  return out;
}

ImageBuffer resize_and_crop(const ImageBuffer& img, int target_width, int target_height, Interp method) {
  require(target_width > 0 && target_height > 0, "target dims must be positive");
  const int w = img.width();
  const int h = img.height();
  if (w == target_width && h == target_height) return img;
  if (w < target_width && h < target_height)
    fail(ErrorCode::kInvalidArgument, "source " + std::to_string(w) + "x" + std::to_string(h) +
                                          " is smaller than target " + std::to_string(target_width) + "x" +
                                          std::to_string(target_height) + " in both dimensions");
  const double sx = static_cast<double>(target_width) / w;
  const double sy = static_cast<double>(target_height) / h;
  int nw, nh;
  if (sx >= sy) {  // width fits exactly, height overflows
    nw = target_width;
    nh = std::max(target_height, static_cast<int>(std::lround(h * sx)));
  } else {
    nh = target_height;
    nw = std::max(target_width, static_cast<int>(std::lround(w * sy)));
  }
  const ImageBuffer scaled = (nw == w && nh == h) ? img : resample(img, nw, nh, method);
  if (nw == target_width && nh == target_height) return scaled;
  const int ox = (nw - target_width) / 2;
  const int oy = (nh - target_height) / 2;
  ImageBuffer out(target_width, target_height, img.channels(), 0.0, img.space());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < target_height; ++y)
      for (int x = 0; x < target_width; ++x) out.at(x, y, c) = scaled.at(x + ox, y + oy, c);
  return out;
}

double sample_bicubic(std::span<const double> plane, int width, int height, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  double acc = 0.0;
  for (int j = -1; j <= 2; ++j) {
    const double wy = cubic(y - (y0 + j));
    if (wy == 0.0) continue;
    const int yy = std::clamp(y0 + j, 0, height - 1);
    for (int i = -1; i <= 2; ++i) {
      const double wx = cubic(x - (x0 + i));
      const int xx = std::clamp(x0 + i, 0, width - 1);
      acc += wx * wy * plane[static_cast<std::size_t>(yy) * width + xx];
    }
  }
  return acc;
}

}  // namespace iqa
