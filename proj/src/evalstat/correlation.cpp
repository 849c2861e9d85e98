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

#include "iqa/error.hpp"
#include "iqa/evalstat.hpp"
#include "iqa/stats.hpp"

namespace iqa::eval {

double srocc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kInvalidArgument, "srocc: length mismatch");
  if (x.size() < 2) fail(ErrorCode::kInvalidArgument, "srocc needs at least two samples");
  return stats::spearman(x, y);
}

double dmos(std::span<const int> ratings) {
  if (ratings.empty()) fail(ErrorCode::kValidation, "dmos of an empty rating list");
  double sum = 0.0;
  for (int r : ratings) {
    if (r < 1 || r > 5) fail(ErrorCode::kValidation, "rating " + std::to_string(r) + " outside 1..5");
    sum += r;
  }
  return sum / static_cast<double>(ratings.size());
}

double LogisticFit::operator()(double o) const {
  const auto& b = beta;
  return b[0] * (0.5 - 1.0 / (1.0 + std::exp(b[1] * (o - b[2])))) + b[3] * o + b[4];
}

std::vector<double> LogisticFit::map(std::span<const double> objective) const {
  std::vector<double> out(objective.size());
  for (std::size_t i = 0; i < objective.size(); ++i) out[i] = (*this)(objective[i]);
  return out;
}

namespace {

using Params = std::array<double, 5>;

constexpr int kMaxIterations = 2000;
constexpr double kDiameterTol = 1e-10;

struct NmResult {
  Params x;
  double f;
  int iterations;
  bool converged;
};

template <typename F>
NmResult nelder_mead(const F& f, const Params& start, const Params& step) {
  constexpr int n = 5;
  std::array<Params, n + 1> pts;
  std::array<double, n + 1> val;
  pts[0] = start;
  for (int i = 0; i < n; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += step[i];
  }
  for (int i = 0; i <= n; ++i) val[i] = f(pts[i]);

  std::array<int, n + 1> order;
  int it = 0;
  bool converged = false;
  for (; it < kMaxIterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
    double diameter = 0.0;
    for (int i = 1; i <= n; ++i) {
      double d = 0.0;
      for (int j = 0; j < n; ++j) d = std::max(d, std::abs(pts[order[i]][j] - pts[order[0]][j]));
      diameter = std::max(diameter, d);
    }
    if (diameter < kDiameterTol) {
      converged = true;
      break;
    }
    const int worst = order[n];
    Params centroid{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) centroid[j] += pts[order[i]][j] / n;
    auto along = [&](double t) {
      Params p;
      for (int j = 0; j < n; ++j) p[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
      return p;
    };
    const Params xr = along(-1.0);
    const double fr = f(xr);
    if (fr < val[order[0]]) {
      const Params xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[order[n - 1]]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const Params xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : val[worst])) {
      pts[worst] = xc;
      val[worst] = fc;
      continue;
    }
    const Params best = pts[order[0]];
    for (int i = 1; i <= n; ++i) {
      const int k = order[i];
      for (int j = 0; j < n; ++j) pts[k][j] = best[j] + 0.5 * (pts[k][j] - best[j]);
      val[k] = f(pts[k]);
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (val[i] < val[best]) best = i;
  return {pts[best], val[best], it, converged};
}

}  // namespace

LogisticFit fit_logistic5(std::span<const double> objective, std::span<const double> subjective) {
  if (objective.size() != subjective.size()) fail(ErrorCode::kInvalidArgument, "logistic fit: length mismatch");
  if (objective.size() < 5) fail(ErrorCode::kInvalidArgument, "logistic fit needs at least 5 samples");
  for (std::size_t i = 0; i < objective.size(); ++i)
    if (!std::isfinite(objective[i]) || !std::isfinite(subjective[i]))
      fail(ErrorCode::kValidation, "logistic fit: non-finite input");
  const auto [omin, omax] = std::minmax_element(objective.begin(), objective.end());
  if (*omin == *omax) fail(ErrorCode::kDegenerate, "logistic fit: objective scores are constant");
  const auto [smin, smax] = std::minmax_element(subjective.begin(), subjective.end());

  const double mo = stats::mean(objective);
  const double ms = stats::mean(subjective);
  const double so = std::sqrt(stats::sample_variance(objective));
  const double ss = std::sqrt(stats::sample_variance(subjective));
  const double range_s = *smax - *smin;
  const double range_o = *omax - *omin;
  double orient = 1.0;
  if (*smin != *smax && stats::spearman(objective, subjective) < 0.0) orient = -1.0;

  auto sse = [&](const Params& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < objective.size(); ++i) {
      const double d = b[0] * (0.5 - 1.0 / (1.0 + std::exp(b[1] * (objective[i] - b[2])))) + b[3] * objective[i] +
                       b[4] - subjective[i];
      acc += d * d;
    }
    return std::isfinite(acc) ? acc : std::numeric_limits<double>::infinity();
  };

  // affine least squares
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < objective.size(); ++i) {
    sxy += (objective[i] - mo) * (subjective[i] - ms);
    sxx += (objective[i] - mo) * (objective[i] - mo);
  }
  const double slope = sxy / sxx;

  const Params logistic_start{range_s, orient / so, mo, 0.0, ms};
  const Params affine_start{0.0, orient / so, mo, slope, ms - slope * mo};
  auto steps = [&](const Params& b) {
    const Params scale{std::max(range_s, 1e-3), 1.0 / so, so, std::max(range_s, 1e-3) / range_o, std::max(ss, 1e-3)};
    Params st;
    for (int j = 0; j < 5; ++j) st[j] = std::abs(b[j]) > 1e-12 ? 0.1 * std::abs(b[j]) : 0.1 * scale[j];
    return st;
  };

  LogisticFit best;
  best.residual = std::numeric_limits<double>::infinity();
  for (const Params& start : {logistic_start, affine_start}) {
    NmResult r = nelder_mead(sse, start, steps(start));
    int total = r.iterations;
    // restart from the incumbent with a fresh simplex while it keeps improving
    for (int restart = 0; restart < 2; ++restart) {
      NmResult again = nelder_mead(sse, r.x, steps(r.x));
      total += again.iterations;
      const bool improved = again.f < r.f;
      if (improved) r = again;
      if (!improved || again.converged) {
        r.converged = r.converged || again.converged;
        break;
      }
    }
    if (r.f < best.residual) {
      best.beta = r.x;
      best.residual = r.f;
      best.iterations = total;
      best.converged = r.converged;
    }
  }
  return best;
}

double plcc_mapped(std::span<const double> objective, std::span<const double> subjective) {
  const LogisticFit fit = fit_logistic5(objective, subjective);
  const auto mapped = fit.map(objective);
  return stats::pearson(mapped, subjective);
}

}  // namespace iqa::eval
