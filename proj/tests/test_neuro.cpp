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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "iqa/error.hpp"
#include "iqa/neuro.hpp"
#include "iqa/rng.hpp"

namespace iqa::nn {
namespace {

using Vec = std::vector<double>;

TEST(Plcc, HandCases) {
  EXPECT_NEAR(plcc(Vec{1, 2, 3}, Vec{2, 4, 6}), 1.0, 1e-15);
  EXPECT_NEAR(plcc(Vec{1, 2, 3}, Vec{6, 4, 2}), -1.0, 1e-15);
  EXPECT_NEAR(plcc(Vec{1, 2, 3, 4}, Vec{1, 3, 2, 4}), 0.8, 1e-15);
  EXPECT_THROW(plcc(Vec{1, 1, 1}, Vec{1, 2, 3}), Error);
}

TEST(Loss, PlccCases) {
  const Vec t{1, 2, 3, 4};
  EXPECT_NEAR(plcc_loss(t, t).loss, 0.0, 1e-15);
  EXPECT_NEAR(plcc_loss(Vec{-1, -2, -3, -4}, t).loss, 1.0, 1e-15);
  EXPECT_NEAR(plcc_loss(Vec{1, 3, 2, 4}, t).loss, 0.1, 1e-15);
}

TEST(Loss, PlccConstantTargetIsDegenerate) {
  try {
    plcc_loss(Vec{1, 2, 3}, Vec{2, 2, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Loss, PlccScaleShiftInvariant) {
  Rng rng(5);
  Vec p(30), t(30), q(30);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = rng.normal();
    t[i] = rng.normal();
    q[i] = 3.7 * p[i] - 2.0;
  }
  EXPECT_NEAR(plcc_loss(p, t).loss, plcc_loss(q, t).loss, 1e-10);
}

TEST(Loss, MseMae) {
  EXPECT_EQ(mse_loss(Vec{1, 2}, Vec{1, 2}).loss, 0.0);
  EXPECT_DOUBLE_EQ(mse_loss(Vec{2, 3, 4}, Vec{1, 2, 3}).loss, 1.0);
  EXPECT_DOUBLE_EQ(mae_loss(Vec{2, 3, 4}, Vec{1, 2, 3}).loss, 1.0);
  EXPECT_DOUBLE_EQ(mse_loss(Vec{0, 0}, Vec{1, 3}).loss, 5.0);
  EXPECT_DOUBLE_EQ(mae_loss(Vec{0, 0}, Vec{1, 3}).loss, 2.0);
  const auto tie = mae_loss(Vec{1, 5}, Vec{1, 3});
  EXPECT_EQ(tie.grad[0], 0.0);
  EXPECT_DOUBLE_EQ(tie.grad[1], 0.5);
}

TEST(Loss, NameRoundTrip) {
  for (auto k : {LossKind::kMSE, LossKind::kMAE, LossKind::kPLCC}) EXPECT_EQ(loss_from_string(to_string(k)), k);
  EXPECT_THROW(loss_from_string("huber"), Error);
}

TEST(Loss, GradientsMatchFiniteDifferences) {
  Rng rng(6);
  Vec p(16), t(16);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = rng.normal();
    t[i] = rng.normal();
  }
  for (auto k : {LossKind::kMSE, LossKind::kMAE, LossKind::kPLCC}) {
    const auto check = check_loss_gradient(k, p, t);
    EXPECT_EQ(check.coordinates, p.size());
    EXPECT_LT(check.max_rel_error, 1e-5) << to_string(k);
  }
}

TEST(Mtl, EqualWeights) {
  // per-task PLCC losses 0.1 and 0.5 average to 0.3
  const Vec t{1, 2, 3, 4}, a{1, 3, 2, 4}, b{1, 2, 3, 4}, bt{1, 4, 4, 1};
  // plcc(b, bt) = 0, so its loss is 0.5
  const std::vector<TaskBatch> tasks{{"a", a, t}, {"b", b, bt}};
  const auto r = mtl_loss(tasks, {}, LossKind::kPLCC);
  EXPECT_NEAR(r.task_losses[0], 0.1, 1e-15);
  EXPECT_NEAR(r.task_losses[1], 0.5, 1e-15);
  EXPECT_NEAR(r.loss, 0.3, 1e-15);
}

TEST(Mtl, IdenticalTasksMatchSingleTask) {
  const Vec p{0.3, 1.2, -0.4, 2.0, 0.1}, t{1, 2, 0, 3, 1.5};
  const std::vector<TaskBatch> tasks(3, TaskBatch{"x", p, t});
  EXPECT_EQ(mtl_loss(tasks, {}, LossKind::kPLCC).loss, plcc_loss(p, t).loss);
}

TEST(Mtl, ErrorNamesTask) {
  const Vec p{1, 2, 3}, t{1, 2, 3}, flat{2, 2, 2};
  const std::vector<TaskBatch> tasks{{"good", p, t}, {"vif", p, flat}};
  try {
    mtl_loss(tasks, {}, LossKind::kPLCC);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("vif"), std::string::npos);
  }
}

TEST(Mtl, ElevenTasksAccepted) {
  const auto m = build_mtl_head(8, 11, 1,
                                {"psnr", "ssim", "msssim", "fsim", "gmsd", "mad", "mdsi", "vif", "vsi", "sr_sim", "ifs"});
  EXPECT_EQ(m.num_heads(), 11u);
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate(11));
}

TEST(Identity, HandCaseAndEqual) {
  EXPECT_LT(verify_plcc_mse_equivalence(Vec{1, 2, 3, 4}, Vec{1, 3, 2, 4}), 1e-15);
  EXPECT_LT(verify_plcc_mse_equivalence(Vec{1, 5, 2}, Vec{1, 5, 2}), 1e-15);
}

TEST(Build, RegressorParameterCount) {
  // 16928*2048 + 2048 + 2048*1024 + 1024 + 1024*256 + 256 + 256 + 1
  const auto m = build_regressor(16928, 1);
  EXPECT_EQ(m.parameter_count(), 37031425u);
  ASSERT_EQ(m.heads.size(), 1u);
  const auto& l = m.heads[0].layers;
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0].out_dim(), 2048);
  EXPECT_EQ(l[1].out_dim(), 1024);
  EXPECT_EQ(l[2].out_dim(), 256);
  EXPECT_EQ(l[3].out_dim(), 1);
  EXPECT_EQ(l[3].activation, Activation::kLinear);
}

TEST(Build, MtlHeadSchedule) {
  const auto m = build_mtl_head(1536, 1);
  const auto& l = m.heads[0].layers;
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0].in_dim(), 1536);
  EXPECT_EQ(l[0].out_dim(), 512);
  EXPECT_EQ(l[1].out_dim(), 256);
  EXPECT_EQ(l[2].out_dim(), 1);
  EXPECT_DOUBLE_EQ(l[0].dropout, 0.25);
  EXPECT_DOUBLE_EQ(l[1].dropout, 0.5);
}

TEST(Build, SeedDeterminism) {
  EXPECT_TRUE(same_parameters(build_mtl_head(32, 2, 9), build_mtl_head(32, 2, 9)));
  EXPECT_FALSE(same_parameters(build_mtl_head(32, 2, 9), build_mtl_head(32, 2, 10)));
}

TEST(Build, HeInitScale) {
  const auto m = build_mtl_head(400, 1, 3);
  const auto& w = m.heads[0].layers[0].weight;
  const double var = w.array().square().mean();
  EXPECT_NEAR(var, 2.0 / 400.0, 0.05 * 2.0 / 400.0);
}

NetworkModel linear_unit(double w, double b) {
  auto m = build_network(1, {{{1, Activation::kLinear, 0.0}}}, {"q"}, 0);
  m.heads[0].layers[0].weight(0, 0) = w;
  m.heads[0].layers[0].bias(0) = b;
  return m;
}

TEST(Forward, LinearUnit) {
  const auto m = linear_unit(2.0, 1.0);
  Eigen::MatrixXd x(1, 1);
  x << 3.0;
  EXPECT_DOUBLE_EQ(forward(m, x, Mode::kEval)(0, 0), 7.0);
}

TEST(Forward, ZeroWeightsGiveOutputBias) {
  auto m = build_mtl_head(6, 2, 4);
  for (auto& h : m.heads)
    for (auto& l : h.layers) l.weight.setZero();
  m.heads[0].layers.back().bias(0) = 0.7;
  m.heads[1].layers.back().bias(0) = -1.5;
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 6);
  const auto y = forward(m, x, Mode::kEval);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(y(i, 0), 0.7);
    EXPECT_EQ(y(i, 1), -1.5);
  }
}

TEST(Forward, EvalDeterministicTrainSeeded) {
  const auto m = build_mtl_head(10, 1, 5);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 10);
  EXPECT_EQ(forward(m, x, Mode::kEval), forward(m, x, Mode::kEval));
  EXPECT_EQ(forward(m, x, Mode::kTrain, 3), forward(m, x, Mode::kTrain, 3));
  EXPECT_NE(forward(m, x, Mode::kTrain, 3), forward(m, x, Mode::kEval));
}

TEST(Forward, DimMismatch) {
  const auto m = build_mtl_head(10, 1);
  EXPECT_THROW(forward(m, Eigen::MatrixXd::Zero(2, 9), Mode::kEval), Error);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  const auto m = build_mtl_head(6, 2, 1);
  ForwardCache cache;
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 6);
  forward(m, x, Mode::kEval, 0, &cache);
  const auto g = backward(m, cache, Eigen::MatrixXd::Zero(4, 2));
  for (const auto& h : g.heads)
    for (const auto& l : h) {
      EXPECT_EQ(l.weight.norm(), 0.0);
      EXPECT_EQ(l.bias.norm(), 0.0);
    }
}

TEST(Backward, LinearUnitHandFormula) {
  const auto m = linear_unit(0.5, 0.2);
  Eigen::MatrixXd x(1, 1);
  x << 3.0;
  ForwardCache cache;
  const double pred = forward(m, x, Mode::kEval, 0, &cache)(0, 0);
  const double y = 4.0;
  const auto loss = mse_loss(Vec{pred}, Vec{y});
  Eigen::MatrixXd d(1, 1);
  d << loss.grad[0];
  const auto g = backward(m, cache, d);
  EXPECT_DOUBLE_EQ(g.heads[0][0].weight(0, 0), 2.0 * (pred - y) * 3.0);
  EXPECT_DOUBLE_EQ(g.heads[0][0].bias(0), 2.0 * (pred - y));
}

TEST(Backward, StaleCacheRejected) {
  auto m = build_mtl_head(6, 1, 1);
  ForwardCache cache;
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 6);
  forward(m, x, Mode::kEval, 0, &cache);
  m.revision += 1;
  EXPECT_THROW(backward(m, cache, Eigen::MatrixXd::Ones(3, 1)), Error);
}

TEST(Backward, FiniteDifferencesBothArchitectures) {
  Rng rng(7);
  Eigen::MatrixXd x(6, 12);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const auto mtl = build_mtl_head(12, 2, 2);
  Eigen::MatrixXd w2(6, 2);
  for (int i = 0; i < w2.size(); ++i) w2.data()[i] = rng.normal();
  EXPECT_LT(check_network_gradient(mtl, x, w2, 20, 1).max_rel_error, 1e-5);
  const auto reg = build_regressor(12, 3);
  Eigen::MatrixXd w1(6, 1);
  for (int i = 0; i < w1.size(); ++i) w1.data()[i] = rng.normal();
  EXPECT_LT(check_network_gradient(reg, x, w1, 20, 2).max_rel_error, 1e-5);
}

TEST(Adam, ZeroGradientKeepsParameters) {
  auto m = build_mtl_head(5, 1, 1);
  const auto before = m;
  auto st = AdamState::for_model(m);
  auto g = st.m;  // zero-shaped
  adam_step(st, m, g, 1e-2);
  EXPECT_EQ(st.step, 1u);
  EXPECT_TRUE(same_parameters(m, before));
}

TEST(Adam, FirstStepMovesBySignTimesLr) {
  auto m = build_mtl_head(5, 1, 1);
  const auto before = m;
  auto st = AdamState::for_model(m);
  auto g = st.m;
  Rng rng(8);
  for (auto& l : g.heads[0]) {
    for (int i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = rng.normal();
    for (int i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = rng.normal();
  }
  const double lr = 1e-3;
  adam_step(st, m, g, lr);
  for (std::size_t k = 0; k < g.heads[0].size(); ++k) {
    const auto& gw = g.heads[0][k].weight;
    const Eigen::MatrixXd dw = m.heads[0].layers[k].weight - before.heads[0].layers[k].weight;
    for (int i = 0; i < gw.size(); ++i) {
      // |g| / (|g| + eps) differs from 1 by at most eps / |g|
      const double expect = -lr * (gw.data()[i] > 0 ? 1.0 : -1.0);
      EXPECT_NEAR(dw.data()[i], expect, lr * 1e-8 / std::abs(gw.data()[i]) + 1e-15);
    }
  }
}

TrainData linear_data(int n, int dim, int tasks, std::uint64_t seed) {
  Rng rng(seed);
  TrainData d{Eigen::MatrixXd(n, dim), Eigen::MatrixXd(n, tasks)};
  for (int i = 0; i < d.x.size(); ++i) d.x.data()[i] = rng.normal();
  for (int k = 0; k < tasks; ++k)
    for (int i = 0; i < n; ++i) d.y(i, k) = 0.8 * d.x(i, k) - 0.5 * d.x(i, k + 1) + 0.3 * d.x(i, 3) + 0.1 * k;
  return d;
}

TEST(Train, ZeroEpochsReturnsInit) {
  const auto init = build_mtl_head(8, 1, 4);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto data = linear_data(16, 8, 1, 1);
  const auto r = train(init, data, data, cfg);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best_epoch, 0);
  EXPECT_TRUE(same_parameters(r.model, init));
}

TEST(Train, SmallNetworkOverfitsMse) {
  const auto init = build_network(8, {{{64, Activation::kReLU, 0.0}, {1, Activation::kLinear, 0.0}}}, {"q"}, 2);
  const auto data = linear_data(64, 8, 1, 2);
  TrainConfig cfg;
  cfg.loss = LossKind::kMSE;
  cfg.lr = 1e-2;
  cfg.epochs = 300;
  cfg.dropout = false;
  const auto r = train(init, data, TrainData{}, cfg);
  EXPECT_LT(evaluate_loss(r.model, data, cfg), 1e-3);
}

TEST(Train, BitwiseDeterministic) {
  const auto init = build_mtl_head(8, 2, 4);
  const auto data = linear_data(40, 8, 2, 3);
  const auto val = linear_data(20, 8, 2, 4);
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.batch_size = 16;
  cfg.epochs = 5;
  cfg.seed = 11;
  const auto a = train(init, data, val, cfg);
  const auto b = train(init, data, val, cfg);
  EXPECT_TRUE(same_parameters(a.model, b.model));
  ASSERT_EQ(a.history.size(), 5u);
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].val_loss, b.history[i].val_loss);
}

TEST(Train, KeepsBestValidationEpoch) {
  const auto init = build_mtl_head(8, 1, 4);
  const auto data = linear_data(48, 8, 1, 5);
  const auto val = linear_data(16, 8, 1, 6);
  TrainConfig cfg;
  cfg.loss = LossKind::kMSE;
  cfg.lr = 1e-3;
  cfg.batch_size = 16;
  cfg.epochs = 8;
  const auto r = train(init, data, val, cfg);
  double best = evaluate_loss(init, val, cfg);
  for (const auto& e : r.history) best = std::min(best, e.val_loss);
  EXPECT_DOUBLE_EQ(r.best_val_loss, best);
  EXPECT_DOUBLE_EQ(evaluate_loss(r.model, val, cfg), best);
}

TEST(Checkpoint, RoundTripAndBadMagic) {
  const auto dir = std::filesystem::temp_directory_path() / "iqa_test_neuro";
  std::filesystem::create_directories(dir);
  const auto m = build_mtl_head(7, 3, 6, {"a", "bb", "ccc"});
  save_checkpoint(m, dir / "m.bin");
  const auto back = load_checkpoint(dir / "m.bin");
  EXPECT_TRUE(same_parameters(m, back));
  EXPECT_EQ(back.head_names(), m.head_names());
  {
    std::ofstream out(dir / "bad.bin", std::ios::binary);
    out << "NOPE0000";
  }
  EXPECT_THROW(load_checkpoint(dir / "bad.bin"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace iqa::nn
