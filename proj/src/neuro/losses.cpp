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

#include <cmath>

#include "iqa/error.hpp"
#include "iqa/neuro.hpp"
#include "iqa/scorepipe.hpp"
#include "iqa/stats.hpp"

namespace iqa::nn {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kMSE: return "mse";
    case LossKind::kMAE: return "mae";
    case LossKind::kPLCC: return "plcc";
  }
  return "?";
}

LossKind loss_from_string(std::string_view name) {
  if (name == "mse" || name == "MSE") return LossKind::kMSE;
  if (name == "mae" || name == "MAE") return LossKind::kMAE;
  if (name == "plcc" || name == "PLCC") return LossKind::kPLCC;
  fail(ErrorCode::kValidation, "unknown loss '" + std::string(name) + "' (expected mse, mae or plcc)");
}

double plcc(std::span<const double> x, std::span<const double> y) { return stats::pearson(x, y); }

namespace {

void check_pair(std::span<const double> pred, std::span<const double> target, std::size_t min_n) {
  if (pred.size() != target.size())
    fail(ErrorCode::kInvalidArgument, "loss: prediction and target lengths differ (" + std::to_string(pred.size()) +
                                          " vs " + std::to_string(target.size()) + ")");
  if (pred.size() < min_n)
    fail(ErrorCode::kInvalidArgument, "loss: needs at least " + std::to_string(min_n) + " samples");
}

}  // namespace

LossResult plcc_loss(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 2);
  const std::size_t n = pred.size();
  const double mx = stats::mean(pred);
  const double my = stats::mean(target);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pred[i] - mx;
    const double dy = target[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(syy > 0.0))
    fail(ErrorCode::kDegenerate,
         "PLCC loss: target is constant within the batch; use a larger or reshuffled batch");
  if (!(sxx > 0.0)) fail(ErrorCode::kDegenerate, "PLCC loss: prediction is constant within the batch");
  const double norm = std::sqrt(sxx * syy);
  const double r = sxy / norm;
  LossResult out;
  out.loss = 0.5 * (1.0 - r);
  out.grad.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.grad[i] = -0.5 * ((target[i] - my) / norm - r * (pred[i] - mx) / sxx);
  return out;
}

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 1);
  const double n = static_cast<double>(pred.size());
  LossResult out;
  out.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    out.loss += d * d;
    out.grad[i] = 2.0 * d / n;
  }
  out.loss /= n;
  return out;
}

LossResult mae_loss(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 1);
  const double n = static_cast<double>(pred.size());
  LossResult out;
  out.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    out.loss += std::abs(d);
    out.grad[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
  }
  out.loss /= n;
  return out;
}

LossResult compute_loss(LossKind kind, std::span<const double> pred, std::span<const double> target) {
  switch (kind) {
    case LossKind::kMSE: return mse_loss(pred, target);
    case LossKind::kMAE: return mae_loss(pred, target);
    case LossKind::kPLCC: return plcc_loss(pred, target);
  }
  fail(ErrorCode::kInvalidArgument, "unknown loss kind");
}

MtlLossResult mtl_loss(std::span<const TaskBatch> tasks, std::span<const double> weights, LossKind kind) {
  require(!tasks.empty(), "mtl_loss needs at least one task");
  require(weights.empty() || weights.size() == tasks.size(), "mtl_loss: one weight per task is required");
  const double uniform = 1.0 / static_cast<double>(tasks.size());
  MtlLossResult out;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const double w = weights.empty() ? uniform : weights[k];
    LossResult r;
    try {
      r = compute_loss(kind, tasks[k].pred, tasks[k].target);
    } catch (const Error& e) {
      fail(e.code(), "task '" + tasks[k].name + "': " + e.what());
    }
    out.loss += w * r.loss;
    out.task_losses.push_back(r.loss);
    for (auto& g : r.grad) g *= w;
    out.grads.push_back(std::move(r.grad));
  }
  return out;
}

double verify_plcc_mse_equivalence(std::span<const double> x, std::span<const double> y) {
  const double lp = plcc_loss(x, y).loss;
  const auto zx = zscore(x);
  const auto zy = zscore(y);
  const double n = static_cast<double>(x.size());
  const double lm = mse_loss(zx, zy).loss;
  return std::abs(lp - 0.25 * n / (n - 1.0) * lm);
}

}  // namespace iqa::nn
