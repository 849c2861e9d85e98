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

#include "iqa/error.hpp"
#include "iqa/features.hpp"

namespace iqa {

namespace {

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  double at(int x, int y) const {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return v[static_cast<std::size_t>(y) * w + x];
  }
};

Plane half(const Plane& p) {
  Plane out{p.w / 2, p.h / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.w) * out.h);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.v[static_cast<std::size_t>(y) * out.w + x] =
          0.25 * (p.at(2 * x, 2 * y) + p.at(2 * x + 1, 2 * y) + p.at(2 * x, 2 * y + 1) + p.at(2 * x + 1, 2 * y + 1));
  return out;
}

Plane blur(const Plane& p, std::span<const double> taps) {
  const ImageBuffer img(p.w, p.h, 1, p.v, ColorSpace::kLuma);
  const ImageBuffer b = convolve_separable(img, taps, taps, Border::kReplicate);
  const auto s = b.samples();
  return {p.w, p.h, std::vector<double>(s.begin(), s.end())};
}

Plane local_sigma(const Plane& p, const Plane& mu, std::span<const double> taps) {
  Plane sq{p.w, p.h, p.v};
  for (auto& v : sq.v) v *= v;
  Plane s = blur(sq, taps);
  for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] = std::sqrt(std::max(0.0, s.v[i] - mu.v[i] * mu.v[i]));
  return s;
}

constexpr double kMscnC = 1.0 / 255.0;
constexpr double kBinCentres[] = {-2.0, -1.0, -0.3, 0.3, 1.0, 2.0};
constexpr double kBinWidth = 0.5;

ActivationBlock scale_block(const Plane& y, const Plane& cb, const Plane& cr, std::span<const double> taps) {
  const Plane mu = blur(y, taps);
  const Plane sigma = local_sigma(y, mu, taps);
  Plane mscn{y.w, y.h, std::vector<double>(y.v.size())};
  for (std::size_t i = 0; i < y.v.size(); ++i) mscn.v[i] = (y.v[i] - mu.v[i]) / (sigma.v[i] + kMscnC);
  const Plane sb = local_sigma(cb, blur(cb, taps), taps);
  const Plane sr = local_sigma(cr, blur(cr, taps), taps);

  ActivationBlock b{y.h, y.w, kFilterbankChannels, {}};
  b.data.resize(static_cast<std::size_t>(y.w) * y.h * kFilterbankChannels);
  float* out = b.data.data();
  const int w = y.w;
  for (int yy = 0; yy < y.h; ++yy) {
    const std::size_t r0 = static_cast<std::size_t>(yy) * w;
    const std::size_t rm = static_cast<std::size_t>(std::max(yy - 1, 0)) * w;
    const std::size_t rp = static_cast<std::size_t>(std::min(yy + 1, y.h - 1)) * w;
    for (int xx = 0; xx < w; ++xx, out += kFilterbankChannels) {
      const std::size_t c0 = static_cast<std::size_t>(xx);
      const std::size_t cm = static_cast<std::size_t>(std::max(xx - 1, 0));
      const std::size_t cp = static_cast<std::size_t>(std::min(xx + 1, w - 1));
      const std::size_t i = r0 + c0;
      const double m = mscn.v[i];
      auto grad = [&](const Plane& p) {
        const double gx = 0.5 * (p.v[r0 + cp] - p.v[r0 + cm]);
        const double gy = 0.5 * (p.v[rp + c0] - p.v[rm + c0]);
        return std::sqrt(gx * gx + gy * gy);
      };
      const double lap = y.v[r0 + cp] + y.v[r0 + cm] + y.v[rp + c0] + y.v[rm + c0] - 4.0 * y.v[i];
      const double dcb = cb.v[i] - 0.5, dcr = cr.v[i] - 0.5;
      out[0] = static_cast<float>(m * m);
      out[1] = static_cast<float>(std::abs(m));
      out[2] = static_cast<float>(m * mscn.v[r0 + cp]);
      out[3] = static_cast<float>(m * mscn.v[rp + c0]);
      out[4] = static_cast<float>(m * mscn.v[rp + cp]);
      out[5] = static_cast<float>(m * mscn.v[rm + cp]);
      out[6] = static_cast<float>(sigma.v[i]);
      out[7] = static_cast<float>(grad(y));
      out[8] = static_cast<float>(lap * lap);
      for (int k = 0; k < 6; ++k)
        out[9 + k] = static_cast<float>(std::max(0.0, 1.0 - std::abs(m - kBinCentres[k]) / kBinWidth));
      out[15] = static_cast<float>(sb.v[i]);
      out[16] = static_cast<float>(sr.v[i]);
      out[17] = static_cast<float>(grad(cb));
      out[18] = static_cast<float>(grad(cr));
      out[19] = static_cast<float>(std::sqrt(dcb * dcb + dcr * dcr));
    }
  }
  return b;
}

}  // namespace

std::vector<ActivationBlock> filterbank_activations(const ImageBuffer& rgb) {
  require(rgb.channels() == 3 && rgb.space() == ColorSpace::kRGB, "filter-bank features expect an RGB image");
  const int min_side = 8 << (kFilterbankScales - 1);
  if (rgb.width() < min_side || rgb.height() < min_side)
    fail(ErrorCode::kInvalidArgument, "filter-bank features need images of at least " + std::to_string(min_side) +
                                          " pixels per side");
  const ImageBuffer ycc = color_convert(rgb, ColorSpace::kYCbCr);
  auto plane = [&](int c) {
    const auto s = ycc.plane(c);
    return Plane{ycc.width(), ycc.height(), std::vector<double>(s.begin(), s.end())};
  };
  Plane y = plane(0), cb = plane(1), cr = plane(2);
  const auto taps = gaussian_taps(7.0 / 6.0);
  std::vector<ActivationBlock> blocks;
  for (int s = 0; s < kFilterbankScales; ++s) {
    if (s > 0) {
      y = half(y);
      cb = half(cb);
      cr = half(cr);
    }
    blocks.push_back(scale_block(y, cb, cr, taps));
  }
  return blocks;
}

}  // namespace iqa
