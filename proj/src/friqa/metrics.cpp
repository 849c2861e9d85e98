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
#include <string>

#include "iqa/error.hpp"
#include "iqa/friqa.hpp"
#include "iqa/stats.hpp"

namespace iqa {

namespace {

void require_same_dims(const ImageBuffer& a, const ImageBuffer& b, const char* metric) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    fail(ErrorCode::kInvalidArgument, std::string(metric) + ": dimension mismatch (" + std::to_string(a.width()) +
                                          "x" + std::to_string(a.height()) + "x" + std::to_string(a.channels()) +
                                          " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                                          "x" + std::to_string(b.channels()) + ")");
}

ImageBuffer metric_luma(const ImageBuffer& img) { return img.channels() == 1 ? img : luma(img); }

// Local statistics from Gaussian filtering, cropped to the valid region.
struct LocalStats {
  int width = 0;
  int height = 0;
  std::vector<double> mu_x, mu_y, var_x, var_y, cov;
};

// Separable filter over the positions where the window fits; the result is
// (w - k + 1) x (h - k + 1).
std::vector<double> filter_valid(const double* src, int w, int h, const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int ow = w - k + 1, oh = h - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    const double* row = src + static_cast<std::size_t>(y) * w;
    double* o = tmp.data() + static_cast<std::size_t>(y) * ow;
    for (int j = 0; j < k; ++j) {
      const double t = taps[j];
      for (int x = 0; x < ow; ++x) o[x] += t * row[x + j];
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh, 0.0);
  for (int y = 0; y < oh; ++y) {
    double* o = out.data() + static_cast<std::size_t>(y) * ow;
    for (int j = 0; j < k; ++j) {
      const double t = taps[j];
      const double* in = tmp.data() + static_cast<std::size_t>(y + j) * ow;
      for (int x = 0; x < ow; ++x) o[x] += t * in[x];
    }
  }
  return out;
}

LocalStats local_stats(const ImageBuffer& x, const ImageBuffer& y, const SsimOptions& opt) {
  const int r = opt.window / 2;
  const int w = x.width(), h = x.height();
  // Separable taps for a fixed-size Gaussian window.
  std::vector<double> taps(static_cast<std::size_t>(opt.window));
  double s = 0.0;
  for (int i = -r; i <= r; ++i) s += taps[i + r] = std::exp(-(i * i) / (2.0 * opt.sigma * opt.sigma));
  for (double& t : taps) t /= s;

  const auto px = x.plane(0), py = y.plane(0);
  std::vector<double> xx(px.size()), yy(px.size()), xy(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    xx[i] = px[i] * px[i];
    yy[i] = py[i] * py[i];
    xy[i] = px[i] * py[i];
  }

  LocalStats st;
  st.width = w - 2 * r;
  st.height = h - 2 * r;
  st.mu_x = filter_valid(px.data(), w, h, taps);
  st.mu_y = filter_valid(py.data(), w, h, taps);
  st.var_x = filter_valid(xx.data(), w, h, taps);
  st.var_y = filter_valid(yy.data(), w, h, taps);
  st.cov = filter_valid(xy.data(), w, h, taps);
  for (std::size_t k = 0; k < st.mu_x.size(); ++k) {
    const double mx = st.mu_x[k], my = st.mu_y[k];
    st.var_x[k] -= mx * mx;
    st.var_y[k] -= my * my;
    st.cov[k] -= mx * my;
  }
  return st;
}

void require_window_fits(const ImageBuffer& img, const SsimOptions& opt, const char* metric) {
  require(opt.window > 0 && opt.window % 2 == 1, std::string(metric) + ": window must be odd");
  if (img.width() < opt.window || img.height() < opt.window)
    fail(ErrorCode::kInvalidArgument, std::string(metric) + ": image " + std::to_string(img.width()) + "x" +
                                          std::to_string(img.height()) + " is smaller than the " +
                                          std::to_string(opt.window) + "x" + std::to_string(opt.window) + " window");
}

// 2x2 block average, replicate on odd edges.
ImageBuffer half_size(const ImageBuffer& img) {
  const int w = img.width(), h = img.height();
  const int nw = (w + 1) / 2, nh = (h + 1) / 2;
  ImageBuffer out(nw, nh, img.channels(), 0.0, img.space());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < nh; ++y)
      for (int x = 0; x < nw; ++x) {
        const int x0 = 2 * x, y0 = 2 * y;
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        out.at(x, y, c) = 0.25 * (img.at(x0, y0, c) + img.at(x1, y0, c) + img.at(x0, y1, c) + img.at(x1, y1, c));
      }
  return out;
}

}  // namespace

double psnr(const ImageBuffer& ref, const ImageBuffer& dist) {
  require_same_dims(ref, dist, "psnr");
  const auto a = ref.samples(), b = dist.samples();
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = se / static_cast<double>(a.size());
  return 10.0 * std::log10(1.0 / mse);
}

ImageBuffer ssim_map(const ImageBuffer& ref, const ImageBuffer& dist, const SsimOptions& opt) {
  require_same_dims(ref, dist, "ssim");
  require_window_fits(ref, opt, "ssim");
  const double c1 = opt.k1 * opt.k1;
  const double c2 = opt.k2 * opt.k2;
  const LocalStats st = local_stats(metric_luma(ref), metric_luma(dist), opt);
  std::vector<double> map(st.mu_x.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double mx = st.mu_x[i], my = st.mu_y[i];
    map[i] = ((2 * mx * my + c1) * (2 * st.cov[i] + c2)) /
             ((mx * mx + my * my + c1) * (st.var_x[i] + st.var_y[i] + c2));
  }
  return ImageBuffer(st.width, st.height, 1, std::move(map), ColorSpace::kLuma);
}

double ssim(const ImageBuffer& ref, const ImageBuffer& dist, const SsimOptions& opt) {
  const ImageBuffer map = ssim_map(ref, dist, opt);
  return stats::mean(map.samples());
}

double ms_ssim(const ImageBuffer& ref, const ImageBuffer& dist, const SsimOptions& opt) {
  require_same_dims(ref, dist, "ms_ssim");
  const int scales = static_cast<int>(kMsSsimWeights.size());
  const int min_dim = (1 << (scales - 1)) * opt.window;
  if (std::min(ref.width(), ref.height()) < min_dim)
    fail(ErrorCode::kInvalidArgument, "ms_ssim: image " + std::to_string(ref.width()) + "x" +
                                          std::to_string(ref.height()) + " too small for " + std::to_string(scales) +
                                          " scales (need min dimension >= " + std::to_string(min_dim) + ")");
  const double c1 = opt.k1 * opt.k1;
  const double c2 = opt.k2 * opt.k2;
  ImageBuffer x = metric_luma(ref);
  ImageBuffer y = metric_luma(dist);
  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    const LocalStats st = local_stats(x, y, opt);
    double cs = 0.0, lum = 0.0;
    for (std::size_t i = 0; i < st.mu_x.size(); ++i) {
      cs += (2 * st.cov[i] + c2) / (st.var_x[i] + st.var_y[i] + c2);
      if (s == scales - 1) {
        const double mx = st.mu_x[i], my = st.mu_y[i];
        lum += (2 * mx * my + c1) / (mx * mx + my * my + c1);
      }
    }
    const double n = static_cast<double>(st.mu_x.size());
    result *= std::pow(std::max(cs / n, 0.0), kMsSsimWeights[s]);
    if (s == scales - 1) {
      result *= std::pow(std::max(lum / n, 0.0), kMsSsimWeights[s]);
    } else {
      x = half_size(x);
      y = half_size(y);
    }
  }
  return result;
}

double gmsd(const ImageBuffer& ref, const ImageBuffer& dist) {
  require_same_dims(ref, dist, "gmsd");
  constexpr double kC = 170.0;
  auto prepare = [](const ImageBuffer& img) {
    ImageBuffer y = metric_luma(img);
    for (double& v : y.samples()) v *= 255.0;
    return half_size(y);
  };
  const ImageBuffer a = prepare(ref);
  const ImageBuffer b = prepare(dist);
  const Kernel2D px{3, 3, {1.0 / 3, 0, -1.0 / 3, 1.0 / 3, 0, -1.0 / 3, 1.0 / 3, 0, -1.0 / 3}};
  const Kernel2D py{3, 3, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 0, -1.0 / 3, -1.0 / 3, -1.0 / 3}};
  auto magnitude = [&](const ImageBuffer& img) {
    const ImageBuffer gx = convolve(img, px, Border::kReplicate);
    const ImageBuffer gy = convolve(img, py, Border::kReplicate);
    std::vector<double> m(img.plane_size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::hypot(gx.plane(0)[i], gy.plane(0)[i]);
    return m;
  };
  const auto ga = magnitude(a);
  const auto gb = magnitude(b);
  std::vector<double> gms(ga.size());
  for (std::size_t i = 0; i < gms.size(); ++i) gms[i] = (2 * ga[i] * gb[i] + kC) / (ga[i] * ga[i] + gb[i] * gb[i] + kC);
  if (gms.size() < 2) return 0.0;
  return std::sqrt(std::max(0.0, stats::sample_variance(gms)));
}

std::string to_string(Polarity p) { return p == Polarity::kHigherBetter ? "higher" : "lower"; }

Polarity polarity_from_string(const std::string& s) {
  if (s == "higher") return Polarity::kHigherBetter;
  if (s == "lower") return Polarity::kLowerBetter;
  fail(ErrorCode::kValidation, "polarity must be \"higher\" or \"lower\", got \"" + s + "\"");
}

bool is_builtin_metric(const std::string& name) {
  return std::find(kBuiltinMetrics.begin(), kBuiltinMetrics.end(), name) != kBuiltinMetrics.end();
}

Polarity builtin_polarity(const std::string& name) {
  if (!is_builtin_metric(name)) fail(ErrorCode::kInvalidArgument, "unknown built-in metric '" + name + "'");
  return name == "GMSD" ? Polarity::kLowerBetter : Polarity::kHigherBetter;
}

double compute_metric(const std::string& name, const ImageBuffer& ref, const ImageBuffer& dist) {
  if (name == "PSNR") return psnr(ref, dist);
  if (name == "SSIM") return ssim(ref, dist);
  if (name == "MSSSIM") return ms_ssim(ref, dist);
  if (name == "GMSD") return gmsd(ref, dist);
  fail(ErrorCode::kInvalidArgument, "unknown built-in metric '" + name + "' (available: PSNR, SSIM, MSSSIM, GMSD)");
}

}  // namespace iqa
