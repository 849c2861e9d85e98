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
#include "iqa/neuro.hpp"
#include "iqa/rng.hpp"
#include "iqa/stats.hpp"

namespace iqa::nn {

void TrainConfig::validate(std::size_t num_tasks) const {
  if (!(lr > 0.0) || !std::isfinite(lr)) fail(ErrorCode::kValidation, "learning rate must be positive");
  if (batch_size < 1) fail(ErrorCode::kValidation, "batch size must be positive");
  if (loss == LossKind::kPLCC && batch_size < 2)
    fail(ErrorCode::kValidation, "PLCC loss needs a batch size of at least 2");
  if (epochs < 0) fail(ErrorCode::kValidation, "epoch count must be non-negative");
  if (!task_weights.empty()) {
    if (task_weights.size() != num_tasks)
      fail(ErrorCode::kValidation, "task_weights has " + std::to_string(task_weights.size()) + " entries for " +
                                       std::to_string(num_tasks) + " tasks");
    for (double w : task_weights)
      if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorCode::kValidation, "task weights must be finite and >= 0");
  }
}

namespace {

constexpr Eigen::Index kEvalChunk = 1024;

Eigen::MatrixXd predict_all(const NetworkModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd pred(x.rows(), static_cast<Eigen::Index>(model.num_heads()));
  for (Eigen::Index r = 0; r < x.rows(); r += kEvalChunk) {
    const Eigen::Index len = std::min(kEvalChunk, x.rows() - r);
    pred.middleRows(r, len) = forward(model, x.middleRows(r, len), Mode::kEval);
  }
  return pred;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m(r, c);
  return v;
}

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double task_weight(const TrainConfig& config, std::size_t k, std::size_t num_tasks) {
  return config.task_weights.empty() ? 1.0 / static_cast<double>(num_tasks) : config.task_weights[k];
}

void check_data(const NetworkModel& model, const TrainData& d, const char* which) {
  if (d.x.rows() != d.y.rows())
    fail(ErrorCode::kValidation, std::string(which) + " set: feature and label row counts differ");
  if (d.x.rows() == 0) return;
  if (d.x.cols() != model.input_dim)
    fail(ErrorCode::kValidation, std::string(which) + " set has " + std::to_string(d.x.cols()) +
                                     " features, model expects " + std::to_string(model.input_dim));
  if (d.y.cols() != static_cast<Eigen::Index>(model.num_heads()))
    fail(ErrorCode::kValidation, std::string(which) + " set has " + std::to_string(d.y.cols()) +
                                     " label columns, model has " + std::to_string(model.num_heads()) + " heads");
  if (!d.x.allFinite() || !d.y.allFinite())
    fail(ErrorCode::kValidation, std::string(which) + " set contains non-finite values");
}

std::vector<std::vector<Eigen::Index>> make_batches(const std::vector<Eigen::Index>& order, int batch_size,
                                                    bool merge_singletons) {
  std::vector<std::vector<Eigen::Index>> batches;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), i + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (merge_singletons && batches.size() > 1 && batches.back().size() < 2) {
    auto tail = std::move(batches.back());
    batches.pop_back();
    batches.back().insert(batches.back().end(), tail.begin(), tail.end());
  }
  return batches;
}

// Index of the first task whose labels are constant in some batch, or -1.
int constant_label_task(const std::vector<std::vector<Eigen::Index>>& batches, const Eigen::MatrixXd& y) {
  for (const auto& b : batches)
    for (Eigen::Index k = 0; k < y.cols(); ++k) {
      bool constant = true;
      for (auto i : b) constant = constant && y(i, k) == y(b.front(), k);
      if (constant) return static_cast<int>(k);
    }
  return -1;
}

double mean_srocc(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& y) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    const auto p = column(pred, k);
    const auto t = column(y, k);
    if (p.size() < 2 || is_constant(p) || is_constant(t)) return std::numeric_limits<double>::quiet_NaN();
    sum += stats::spearman(p, t);
  }
  return sum / static_cast<double>(y.cols());
}

}  // namespace

namespace {

double loss_from_predictions(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& y, const TrainConfig& config) {
  double total = 0.0;
  const auto num_tasks = static_cast<std::size_t>(y.cols());
  for (std::size_t k = 0; k < num_tasks; ++k) {
    const auto p = column(pred, static_cast<Eigen::Index>(k));
    const auto t = column(y, static_cast<Eigen::Index>(k));
    double l;
    if (config.loss == LossKind::kPLCC && is_constant(p))
      l = 0.5;
    else
      l = compute_loss(config.loss, p, t).loss;
    total += task_weight(config, k, num_tasks) * l;
  }
  return total;
}

}  // namespace

double evaluate_loss(const NetworkModel& model, const TrainData& data, const TrainConfig& config) {
  check_data(model, data, "evaluation");
  require(data.x.rows() > 0, "evaluate_loss needs at least one sample");
  return loss_from_predictions(predict_all(model, data.x), data.y, config);
}

TrainResult train(NetworkModel init, const TrainData& train_set, const TrainData& val_set, const TrainConfig& config) {
  init.validate();
  const std::size_t num_tasks = init.num_heads();
  config.validate(num_tasks);
  check_data(init, train_set, "training");
  check_data(init, val_set, "validation");
  const Eigen::Index n = train_set.x.rows();
  if (n < (config.loss == LossKind::kPLCC ? 2 : 1))
    fail(ErrorCode::kValidation, "training set is too small for the chosen loss");
  const TrainData& select_set = val_set.x.rows() > 0 ? val_set : train_set;

  TrainResult result;
  result.model = init;
  result.best_val_loss = evaluate_loss(init, select_set, config);
  if (config.epochs == 0) return result;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  NetworkModel model = std::move(init);
  AdamState adam = AdamState::for_model(model);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const bool plcc = config.loss == LossKind::kPLCC;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<Eigen::Index>(order));
    auto batches = make_batches(order, config.batch_size, plcc);
    if (plcc) {
      if (constant_label_task(batches, train_set.y) >= 0) {
        rng.shuffle(std::span<Eigen::Index>(order));
        batches = make_batches(order, config.batch_size, plcc);
        result.reshuffles += 1;
        const int task = constant_label_task(batches, train_set.y);
        if (task >= 0)
          fail(ErrorCode::kDegenerate, "epoch " + std::to_string(epoch) + ": task '" +
                                           model.heads[static_cast<std::size_t>(task)].name +
                                           "' has a constant-label batch after reshuffling; increase the batch size");
      }
    }

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& idx = batches[b];
      const Eigen::Index bn = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd xb(bn, train_set.x.cols());
      Eigen::MatrixXd yb(bn, train_set.y.cols());
      for (Eigen::Index i = 0; i < bn; ++i) {
        xb.row(i) = train_set.x.row(idx[static_cast<std::size_t>(i)]);
        yb.row(i) = train_set.y.row(idx[static_cast<std::size_t>(i)]);
      }
      ForwardCache cache;
      const std::uint64_t batch_seed = mix_seed(mix_seed(config.seed ^ 0xD5A7ULL, static_cast<std::uint64_t>(epoch)), b);
      const Eigen::MatrixXd pred =
          forward(model, xb, config.dropout ? Mode::kTrain : Mode::kEval, batch_seed, &cache);
      std::vector<std::vector<double>> p(num_tasks), t(num_tasks);
      std::vector<TaskBatch> tasks;
      for (std::size_t k = 0; k < num_tasks; ++k) {
        p[k] = column(pred, static_cast<Eigen::Index>(k));
        t[k] = column(yb, static_cast<Eigen::Index>(k));
        tasks.push_back({model.heads[k].name, p[k], t[k]});
      }
      const MtlLossResult loss = mtl_loss(tasks, config.task_weights, config.loss);
      Eigen::MatrixXd dpred(bn, static_cast<Eigen::Index>(num_tasks));
      for (std::size_t k = 0; k < num_tasks; ++k)
        for (Eigen::Index i = 0; i < bn; ++i) dpred(i, static_cast<Eigen::Index>(k)) = loss.grads[k][static_cast<std::size_t>(i)];
      const Gradients grads = backward(model, cache, dpred);
      adam_step(adam, model, grads, config.lr);
      loss_sum += loss.loss * static_cast<double>(bn);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    const Eigen::MatrixXd val_pred = predict_all(model, select_set.x);
    rec.val_loss = loss_from_predictions(val_pred, select_set.y, config);
    rec.val_srocc = mean_srocc(val_pred, select_set.y);
    result.history.push_back(rec);
    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  if (result.best_epoch == 0) result.best_val_loss = evaluate_loss(result.model, select_set, config);
  return result;
}

LrSweepResult sweep_learning_rate(const NetworkModel& init, const TrainData& train_set, const TrainData& val_set,
                                  const TrainConfig& config, std::span<const double> rates) {
  static constexpr double kDefaultRates[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  if (rates.empty()) rates = kDefaultRates;
  LrSweepResult out;
  bool have = false;
  for (double lr : rates) {
    TrainConfig c = config;
    c.lr = lr;
    TrainResult r = train(init, train_set, val_set, c);
    out.val_loss_by_lr.emplace_back(lr, r.best_val_loss);
    if (!have || r.best_val_loss < out.best.best_val_loss) {
      out.best_lr = lr;
      out.best = std::move(r);
      have = true;
    }
  }
  return out;
}

}  // namespace iqa::nn
