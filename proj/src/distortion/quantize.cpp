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
#include <limits>
#include <numeric>

#include "internal.hpp"
#include "iqa/distortion.hpp"
#include "iqa/error.hpp"

namespace iqa {

namespace {

constexpr int kBins = 256;

int bin_of(double v) { return std::clamp(static_cast<int>(std::floor(v * kBins)), 0, kBins - 1); }

}  // namespace

std::vector<double> otsu_thresholds(std::span<const double> values, int count) {
  require(count >= 1, "otsu needs at least one threshold");
  std::array<double, kBins> hist{};
  for (double v : values) hist[bin_of(v)] += 1.0;
  std::vector<int> occupied;
  for (int b = 0; b < kBins; ++b)
    if (hist[b] > 0) occupied.push_back(b);
  const int m = static_cast<int>(occupied.size());
  if (m <= 1) return {};
  const int classes = std::min(count + 1, m);

  // Prefix sums over occupied bins of weight, weighted centre and its square.
  std::vector<double> w(m + 1, 0.0), s(m + 1, 0.0), q(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    const double centre = (occupied[i] + 0.5) / kBins;
    const double n = hist[occupied[i]];
    w[i + 1] = w[i] + n;
    s[i + 1] = s[i] + n * centre;
    q[i + 1] = q[i] + n * centre * centre;
  }
  auto sse = [&](int a, int b) {  // occupied bins [a, b)
    const double n = w[b] - w[a];
    const double sum = s[b] - s[a];
    return (q[b] - q[a]) - sum * sum / n;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // cost[k][j]: best SSE splitting the first j occupied bins into k classes.
  std::vector<std::vector<double>> cost(classes + 1, std::vector<double>(m + 1, kInf));
  std::vector<std::vector<int>> cut(classes + 1, std::vector<int>(m + 1, 0));
  cost[0][0] = 0.0;
  for (int k = 1; k <= classes; ++k) {
    for (int j = k; j <= m; ++j) {
      for (int i = k - 1; i < j; ++i) {
        if (cost[k - 1][i] == kInf) continue;
        const double c = cost[k - 1][i] + sse(i, j);
        if (c < cost[k][j]) {
          cost[k][j] = c;
          cut[k][j] = i;
        }
      }
    }
  }
  std::vector<double> thresholds;
  int j = m;
  for (int k = classes; k > 1; --k) {
    const int i = cut[k][j];
    thresholds.push_back(static_cast<double>(occupied[i]) / kBins);
    j = i;
  }
  std::sort(thresholds.begin(), thresholds.end());
  return thresholds;
}

namespace detail {

std::vector<std::array<double, 3>> minimum_variance_palette(const ImageBuffer& img, int colors) {
  require(img.channels() == 3, "palette quantization needs an RGB image");
  require(colors >= 1, "palette needs at least one color");
  const std::size_t n = img.plane_size();
  const std::array<std::span<const double>, 3> ch = {img.plane(0), img.plane(1), img.plane(2)};

  struct Box {
    std::vector<std::uint32_t> idx;
    double sse = 0.0;
  };
  auto box_sse = [&](const std::vector<std::uint32_t>& idx) {
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0, sq = 0.0;
      for (auto i : idx) {
        sum += ch[c][i];
        sq += ch[c][i] * ch[c][i];
      }
      total += sq - sum * sum / static_cast<double>(idx.size());
    }
    return total;
  };

  std::vector<Box> boxes(1);
  boxes[0].idx.resize(n);
  std::iota(boxes[0].idx.begin(), boxes[0].idx.end(), 0u);
  boxes[0].sse = box_sse(boxes[0].idx);

  while (static_cast<int>(boxes.size()) < colors) {
    auto it = std::max_element(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) { return a.sse < b.sse; });
    if (it->sse <= 1e-12 || it->idx.size() < 2) break;
    Box& box = *it;
    // Widest axis by variance.
    int axis = 0;
    double best_var = -1.0;
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0, sq = 0.0;
      for (auto i : box.idx) {
        sum += ch[c][i];
        sq += ch[c][i] * ch[c][i];
      }
      const double var = sq - sum * sum / static_cast<double>(box.idx.size());
      if (var > best_var) {
        best_var = var;
        axis = c;
      }
    }
    std::stable_sort(box.idx.begin(), box.idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return ch[axis][a] < ch[axis][b]; });
    const std::size_t m = box.idx.size();
    std::vector<std::array<double, 6>> prefix(m + 1, std::array<double, 6>{});
    for (std::size_t k = 0; k < m; ++k) {
      prefix[k + 1] = prefix[k];
      for (int c = 0; c < 3; ++c) {
        const double v = ch[c][box.idx[k]];
        prefix[k + 1][c] += v;
        prefix[k + 1][3 + c] += v * v;
      }
    }
    auto part_sse = [&](std::size_t a, std::size_t b) {
      const double cnt = static_cast<double>(b - a);
      double total = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double sum = prefix[b][c] - prefix[a][c];
        total += (prefix[b][3 + c] - prefix[a][3 + c]) - sum * sum / cnt;
      }
      return total;
    };
    std::size_t best_cut = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < m; ++k) {
      if (ch[axis][box.idx[k]] == ch[axis][box.idx[k - 1]]) continue;  // cut between distinct values only
      const double c = part_sse(0, k) + part_sse(k, m);
      if (c < best) {
        best = c;
        best_cut = k;
      }
    }
    if (best_cut == 0) {
      box.sse = 0.0;  // all equal along the widest axis; cannot split further
      continue;
    }
    Box right;
    right.idx.assign(box.idx.begin() + static_cast<std::ptrdiff_t>(best_cut), box.idx.end());
    box.idx.resize(best_cut);
    box.sse = part_sse(0, best_cut);
    right.sse = part_sse(best_cut, m);
    boxes.push_back(std::move(right));
  }

  std::vector<std::array<double, 3>> palette;
  palette.reserve(boxes.size());
  for (const Box& b : boxes) {
    std::array<double, 3> mean{};
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (auto i : b.idx) sum += ch[c][i];
      mean[c] = sum / static_cast<double>(b.idx.size());
    }
    palette.push_back(mean);
  }
  return palette;
}

ImageBuffer dither_to_palette(const ImageBuffer& img, const std::vector<std::array<double, 3>>& palette) {
  require(!palette.empty(), "empty palette");
  const int w = img.width();
  const int h = img.height();
  std::vector<std::array<double, 3>> work(img.plane_size());
  for (std::size_t i = 0; i < work.size(); ++i)
    for (int c = 0; c < 3; ++c) work[i][c] = img.plane(c)[i];
  ImageBuffer out(w, h, 3);
  auto diffuse = [&](int x, int y, const std::array<double, 3>& err, double f) {
    if (x < 0 || x >= w || y >= h) return;
    auto& px = work[static_cast<std::size_t>(y) * w + x];
    for (int c = 0; c < 3; ++c) px[c] += err[c] * f;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto px = work[static_cast<std::size_t>(y) * w + x];
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < palette.size(); ++p) {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) d += (px[c] - palette[p][c]) * (px[c] - palette[p][c]);
        if (d < best_d) {
          best_d = d;
          best = p;
        }
      }
      std::array<double, 3> err{};
      for (int c = 0; c < 3; ++c) {
        out.at(x, y, c) = palette[best][c];
        err[c] = px[c] - palette[best][c];
      }
      diffuse(x + 1, y, err, 7.0 / 16.0);
      diffuse(x - 1, y + 1, err, 3.0 / 16.0);
      diffuse(x, y + 1, err, 5.0 / 16.0);
      diffuse(x + 1, y + 1, err, 1.0 / 16.0);
    }
  }
  return out;
}

namespace {

// Median of nine via the 19-exchange selection network.
inline double median9(double p[9]) {
  auto sort2 = [](double& a, double& b) {
    const double lo = std::min(a, b), hi = std::max(a, b);
    a = lo;
    b = hi;
  };
  sort2(p[1], p[2]), sort2(p[4], p[5]), sort2(p[7], p[8]);
  sort2(p[0], p[1]), sort2(p[3], p[4]), sort2(p[6], p[7]);
  sort2(p[1], p[2]), sort2(p[4], p[5]), sort2(p[7], p[8]);
  sort2(p[0], p[3]), sort2(p[5], p[8]), sort2(p[4], p[7]);
  sort2(p[3], p[6]), sort2(p[1], p[4]), sort2(p[2], p[5]);
  sort2(p[4], p[7]), sort2(p[4], p[2]), sort2(p[6], p[4]);
  sort2(p[4], p[2]);
  return p[4];
}

ImageBuffer median3x3(const ImageBuffer& img) {
  const int w = img.width();
  const int h = img.height();
  ImageBuffer out(w, h, img.channels(), 0.0, img.space());
  for (int c = 0; c < img.channels(); ++c) {
    const auto src = img.plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < h; ++y) {
      const double* rows[3];
      for (int d = 0; d < 3; ++d)
        rows[d] = src.data() + static_cast<std::size_t>(std::clamp(y + d - 1, 0, h - 1)) * w;
      for (int x = 0; x < w; ++x) {
        const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
        double p[9];
        for (int d = 0; d < 3; ++d) {
          p[3 * d] = rows[d][xl];
          p[3 * d + 1] = rows[d][x];
          p[3 * d + 2] = rows[d][xr];
        }
        dst[static_cast<std::size_t>(y) * w + x] = median9(p);
      }
    }
  }
  return out;
}

}  // namespace

ImageBuffer median_filter(const ImageBuffer& img, int size) {
  require(size > 0 && size % 2 == 1, "median filter size must be odd");
  if (size == 3) return median3x3(img);
  const int r = size / 2;
  const int w = img.width();
  const int h = img.height();
  ImageBuffer out(w, h, img.channels(), 0.0, img.space());
  std::vector<double> window(static_cast<std::size_t>(size) * size);
  for (int c = 0; c < img.channels(); ++c) {
    const auto src = img.plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::size_t k = 0;
        for (int dy = -r; dy <= r; ++dy) {
          const int yy = border_index(y + dy, h, Border::kReplicate);
          for (int dx = -r; dx <= r; ++dx)
            window[k++] = src[static_cast<std::size_t>(yy) * w + border_index(x + dx, w, Border::kReplicate)];
        }
        std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(k / 2), window.end());
        dst[static_cast<std::size_t>(y) * w + x] = window[k / 2];
      }
    }
  }
  return out;
}

std::vector<double> gradient_magnitude(const ImageBuffer& img) {
  const ImageBuffer y = luma(img);
  const Kernel2D sobel_x{3, 3, {-1, 0, 1, -2, 0, 2, -1, 0, 1}};
  const Kernel2D sobel_y{3, 3, {-1, -2, -1, 0, 0, 0, 1, 2, 1}};
  const ImageBuffer gx = convolve(y, sobel_x, Border::kReplicate);
  const ImageBuffer gy = convolve(y, sobel_y, Border::kReplicate);
  std::vector<double> mag(y.plane_size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::hypot(gx.plane(0)[i], gy.plane(0)[i]);
  return mag;
}

}  // namespace detail
}  // namespace iqa
