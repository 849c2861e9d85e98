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
#include <vector>

#include "iqa/error.hpp"
#include "iqa/neuro.hpp"
#include "iqa/rng.hpp"

namespace iqa::nn {

namespace {

double rel_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

double objective(const NetworkModel& model, const Eigen::MatrixXd& batch, const Eigen::MatrixXd& weights) {
  return forward(model, batch, Mode::kEval).cwiseProduct(weights).sum();
}

}  // namespace

GradCheck check_loss_gradient(LossKind kind, std::span<const double> pred, std::span<const double> target,
                              double step, double floor) {
  const LossResult base = compute_loss(kind, pred, target);
  std::vector<double> p(pred.begin(), pred.end());
  GradCheck out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p[i];
    const double h = step * std::max(1.0, std::abs(v));
    p[i] = v + h;
    const double up = compute_loss(kind, p, target).loss;
    p[i] = v - h;
    const double down = compute_loss(kind, p, target).loss;
    p[i] = v;
    out.max_rel_error = std::max(out.max_rel_error, rel_error(base.grad[i], (up - down) / (2 * h), floor));
    ++out.coordinates;
  }
  return out;
}

GradCheck check_network_gradient(const NetworkModel& model, const Eigen::MatrixXd& batch,
                                 const Eigen::MatrixXd& weights, int per_layer, std::uint64_t seed, double step,
                                 double floor) {
  require(per_layer > 0, "per_layer must be positive");
  require(weights.rows() == batch.rows() && weights.cols() == static_cast<Eigen::Index>(model.num_heads()),
          "objective weights must be samples x heads");
  ForwardCache cache;
  forward(model, batch, Mode::kEval, 0, &cache);
  const Gradients g = backward(model, cache, weights);

  NetworkModel probe = model;
  const double f0 = objective(probe, batch, weights);
  const double eps = std::numeric_limits<double>::epsilon();
  Rng rng(seed);
  GradCheck out;
  // The objective is piecewise linear in any one parameter. Take the largest
  // step whose one-sided slopes agree, so no ReLU kink lies inside it.
  auto check = [&](double& param, double analytic) {
    const double v = param;
    double numeric = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double h = step * std::pow(0.1, attempt) * std::max(1.0, std::abs(v));
      param = v + h;
      const double up = objective(probe, batch, weights);
      param = v - h;
      const double down = objective(probe, batch, weights);
      param = v;
      const double fwd = (up - f0) / h, bwd = (f0 - down) / h;
      numeric = (up - down) / (2 * h);
      const double noise = 16 * eps * std::max(1.0, std::abs(f0)) / h;
      if (std::abs(fwd - bwd) <= 1e-7 * std::max(std::abs(fwd), std::abs(bwd)) + noise) break;
    }
    out.max_rel_error = std::max(out.max_rel_error, rel_error(analytic, numeric, floor));
    ++out.coordinates;
  };
  for (std::size_t k = 0; k < probe.heads.size(); ++k) {
    for (std::size_t l = 0; l < probe.heads[k].layers.size(); ++l) {
      DenseLayer& layer = probe.heads[k].layers[l];
      const LayerGrad& lg = g.heads[k][l];
      for (int c = 0; c < per_layer; ++c) {
        const auto r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(layer.weight.rows())));
        const auto q = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(layer.weight.cols())));
        check(layer.weight(r, q), lg.weight(r, q));
      }
      for (int c = 0; c < std::min<int>(per_layer, static_cast<int>(layer.bias.size())); ++c) {
        const auto r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(layer.bias.size())));
        check(layer.bias(r), lg.bias(r));
      }
    }
  }
  return out;
}

}  // namespace iqa::nn
