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
#include <numeric>

#include "common.hpp"
#include "iqa/evalstat.hpp"
#include "iqa/friqa.hpp"
#include "iqa/neuro.hpp"
#include "iqa/rng.hpp"
#include "iqa/scorepipe.hpp"
#include "stages.hpp"

namespace iqa::pipeline {

namespace {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
};

Check identity_sweep(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.below(63);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = 0.3 * x[i] + rng.normal();
    }
    worst = std::max(worst, nn::verify_plcc_mse_equivalence(x, y));
  }
  return {"plcc_mse_identity", worst < 1e-10, worst, 1e-10};
}

std::vector<Check> gradient_checks(std::uint64_t seed) {
  std::vector<Check> out;
  Rng rng(seed);
  std::vector<double> p(16), t(16);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = rng.normal();
    t[i] = rng.normal();
  }
  for (auto kind : {nn::LossKind::kMSE, nn::LossKind::kMAE, nn::LossKind::kPLCC}) {
    const auto g = nn::check_loss_gradient(kind, p, t);
    out.push_back({"grad_loss_" + std::string(nn::to_string(kind)), g.max_rel_error < 1e-5, g.max_rel_error, 1e-5});
  }
  const int dim = 12;
  Eigen::MatrixXd x(6, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const auto mtl = nn::build_mtl_head(dim, 2, seed);
  const auto reg = nn::build_regressor(dim, seed);
  Eigen::MatrixXd w2(6, 2), w1(6, 1);
  for (Eigen::Index i = 0; i < w2.size(); ++i) w2.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = rng.normal();
  const auto gm = nn::check_network_gradient(mtl, x, w2, 20, seed);
  const auto gr = nn::check_network_gradient(reg, x, w1, 20, seed);
  out.push_back({"grad_mtl_head", gm.max_rel_error < 1e-5, gm.max_rel_error, 1e-5});
  out.push_back({"grad_regressor", gr.max_rel_error < 1e-5, gr.max_rel_error, 1e-5});
  return out;
}

ImageBuffer noise_image(int w, int h, Rng& rng) {
  ImageBuffer img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = rng.uniform();
  return img;
}

ImageBuffer constant_image(int w, int h, double v) {
  ImageBuffer img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y, 0) = v;
  return img;
}

std::vector<Check> metric_checks(std::uint64_t seed) {
  Rng rng(seed);
  const ImageBuffer img = noise_image(64, 48, rng);
  const double s = ssim(img, img);
  const double g = gmsd(img, img);
  const double c1 = 0.01 * 0.01;
  const double closed = (2 * 0.4 * 0.6 + c1) / (0.4 * 0.4 + 0.6 * 0.6 + c1);
  const double sc = ssim(constant_image(32, 32, 0.4), constant_image(32, 32, 0.6));
  return {{"ssim_identity", std::abs(s - 1.0) < 1e-12, std::abs(s - 1.0), 1e-12},
          {"gmsd_identity", std::abs(g) < 1e-12, std::abs(g), 1e-12},
          {"ssim_constant_closed_form", std::abs(sc - closed) < 1e-9, std::abs(sc - closed), 1e-9}};
}

Check he_uniformity(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 100000;
  const int bins = 256;
  std::vector<double> x(n);
  for (auto& v : x) v = std::exp(2.0 * rng.normal());
  const auto t = fit_he(x, bins);
  const auto y = apply_he(t, x);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : y) ++counts[std::min<std::size_t>(bins - 1, static_cast<std::size_t>(v * bins))];
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  const bool counts_ok = *lo >= n / bins && *hi <= (n + bins - 1) / bins;
  const double rho = eval::srocc(x, y);
  return {"he_uniform_bins", counts_ok && std::abs(rho - 1.0) < 1e-12, static_cast<double>(*hi - *lo), 1.0};
}

std::vector<Check> rank_checks(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.below(99);
    std::vector<double> a(n), b(n);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(b.begin(), b.end(), 1.0);
    rng.shuffle(std::span<double>(b));
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    const double nn = static_cast<double>(n);
    const double closed = 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
    worst = std::max(worst, std::abs(eval::srocc(a, b) - closed));
  }
  const double hand = eval::srocc(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 15});
  return {{"srocc_closed_form", worst < 1e-12, worst, 1e-12},
          {"srocc_hand_case", std::abs(hand - 0.5) < 1e-12, std::abs(hand - 0.5), 1e-12}};
}

}  // namespace

CommandResult cmd_selftest(const Json& raw) {
  Config cfg("selftest", raw, {"seed", "out"});
  const std::uint64_t seed = cfg.seed("seed", 1);
  const std::string out = cfg.str("out", "");
  CommandResult res;
  if (cfg.dry_run()) {
    res.body["checks"] = {"plcc_mse_identity", "gradients", "metric_closed_forms", "he_uniformity", "rank_statistics"};
    res.body["dry_run"] = true;
    return res;
  }
  std::vector<Check> checks;
  checks.push_back(identity_sweep(seed));
  for (auto& c : gradient_checks(seed)) checks.push_back(c);
  for (auto& c : metric_checks(seed)) checks.push_back(c);
  checks.push_back(he_uniformity(seed));
  for (auto& c : rank_checks(seed)) checks.push_back(c);

  Json list = Json::array();
  std::size_t failed = 0;
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"tolerance", c.tolerance}});
    if (!c.pass) ++failed;
    log().info("{} {} ({:.3g})", c.pass ? "PASS" : "FAIL", c.name, c.value);
  }
  res.body["checks"] = list;
  res.body["failed"] = failed;
  if (!out.empty()) {
    write_json(out, {{"tool", {{"name", kToolName}, {"version", kToolVersion}}}, {"checks", list}});
    write_provenance(out, cfg, {});
  }
  if (failed > 0) {
    res.failure = ErrorCode::kValidation;
    res.message = std::to_string(failed) + " self-test check(s) failed";
  }
  return res;
}

}  // namespace iqa::pipeline
