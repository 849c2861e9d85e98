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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

// Fully connected networks trained from scratch in double precision.
namespace iqa::nn {

enum class LossKind { kMSE, kMAE, kPLCC };

std::string_view to_string(LossKind kind);
LossKind loss_from_string(std::string_view name);

// Pearson correlation with sample statistics.
double plcc(std::span<const double> x, std::span<const double> y);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dpred
};

// (1 - plcc) / 2. Throws kDegenerate on a constant target or prediction.
LossResult plcc_loss(std::span<const double> pred, std::span<const double> target);
LossResult mse_loss(std::span<const double> pred, std::span<const double> target);
// Subgradient 0 where pred == target.
LossResult mae_loss(std::span<const double> pred, std::span<const double> target);
LossResult compute_loss(LossKind kind, std::span<const double> pred, std::span<const double> target);

struct TaskBatch {
  std::string name;
  std::span<const double> pred;
  std::span<const double> target;
};

struct MtlLossResult {
  double loss = 0.0;
  std::vector<double> task_losses;
  std::vector<std::vector<double>> grads;
};

// sum_k w_k L_k; empty weights mean 1/K each.
MtlLossResult mtl_loss(std::span<const TaskBatch> tasks, std::span<const double> weights, LossKind kind);

// |L_PLCC(x,y) - N/(4(N-1)) * L_MSE(z(x), z(y))|
double verify_plcc_mse_equivalence(std::span<const double> x, std::span<const double> y);

enum class Activation : std::uint8_t { kReLU = 0, kLinear = 1 };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::kReLU;
  double dropout = 0.0;  // applied to this layer's output

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

struct Head {
  std::string name;
  std::vector<DenseLayer> layers;
};

// K parallel heads reading the same input; each head ends in one neuron.
struct NetworkModel {
  int input_dim = 0;
  std::vector<Head> heads;
  // bumped by every parameter update, used to detect stale caches
  std::uint64_t revision = 0;

  std::size_t num_heads() const { return heads.size(); }
  std::size_t parameter_count() const;
  std::vector<std::string> head_names() const;
  void validate() const;
};

bool same_parameters(const NetworkModel& a, const NetworkModel& b);

struct LayerSpec {
  int units;
  Activation activation;
  double dropout;
};

NetworkModel build_network(int input_dim, const std::vector<std::vector<LayerSpec>>& heads,
                           const std::vector<std::string>& names, std::uint64_t seed);

// Per task: 512 -> dropout 0.25 -> 256 -> dropout 0.5 -> 1.
NetworkModel build_mtl_head(int input_dim, int k, std::uint64_t seed = 0, std::vector<std::string> names = {});
// 2048 -> 1024 -> 256 -> 1, dropout 0.25 / 0.25 / 0.5.
NetworkModel build_regressor(int input_dim, std::uint64_t seed = 0);

enum class Mode { kTrain, kEval };

struct ForwardCache {
  const NetworkModel* model = nullptr;
  std::uint64_t revision = 0;
  Eigen::MatrixXd input;
  // [head][layer]
  std::vector<std::vector<Eigen::MatrixXd>> pre;
  std::vector<std::vector<Eigen::MatrixXd>> out;
  std::vector<std::vector<Eigen::MatrixXd>> mask;
};

// batch: samples x input_dim. Returns samples x K.
Eigen::MatrixXd forward(const NetworkModel& model, const Eigen::MatrixXd& batch, Mode mode, std::uint64_t seed = 0,
                        ForwardCache* cache = nullptr);

struct LayerGrad {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct Gradients {
  std::vector<std::vector<LayerGrad>> heads;
};

// dpred: samples x K.
Gradients backward(const NetworkModel& model, const ForwardCache& cache, const Eigen::MatrixXd& dpred);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  Gradients m;
  Gradients v;

  static AdamState for_model(const NetworkModel& model);
};

void adam_step(AdamState& state, NetworkModel& model, const Gradients& grads, double lr);

struct TrainConfig {
  LossKind loss = LossKind::kPLCC;
  double lr = 1e-4;
  int batch_size = 64;
  int epochs = 30;
  std::uint64_t seed = 0;
  std::vector<double> task_weights;  // empty: 1/K
  bool dropout = true;

  void validate(std::size_t num_tasks) const;
};

struct TrainData {
  Eigen::MatrixXd x;  // samples x features
  Eigen::MatrixXd y;  // samples x tasks
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_srocc = 0.0;  // mean over tasks
};

struct TrainResult {
  NetworkModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 0: the initial model
  double best_val_loss = 0.0;
  int reshuffles = 0;
};

// Minibatch Adam; keeps the parameters with the lowest validation loss. An
// empty validation set selects on the training loss instead.
TrainResult train(NetworkModel init, const TrainData& train_set, const TrainData& val_set, const TrainConfig& config);

// Loss of the model on a whole set in eval mode. A constant prediction counts
// as zero correlation under the PLCC loss.
double evaluate_loss(const NetworkModel& model, const TrainData& data, const TrainConfig& config);

struct LrSweepResult {
  double best_lr = 0.0;
  std::vector<std::pair<double, double>> val_loss_by_lr;
  TrainResult best;
};

LrSweepResult sweep_learning_rate(const NetworkModel& init, const TrainData& train_set, const TrainData& val_set,
                                  const TrainConfig& config,
                                  std::span<const double> rates = std::span<const double>{});

// IQNN: magic, u32 version, u32 input dim, u32 head count; per head a u16
// name length and name, u32 layer count, then per layer u32 in, u32 out,
// u8 activation, f64 dropout, out*in row-major f64 weights, out f64 biases.
// All little-endian.
void save_checkpoint(const NetworkModel& model, const std::filesystem::path& path);
NetworkModel load_checkpoint(const std::filesystem::path& path);

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);

// Central finite-difference checks. Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, floor).
struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

GradCheck check_loss_gradient(LossKind kind, std::span<const double> pred, std::span<const double> target,
                              double step = 1e-6, double floor = 1e-7);

// Eval-mode network under the scalar objective sum(pred .* weights), on
// `per_layer` random weight and bias coordinates of every layer. Steps start
// at `step` and shrink tenfold, up to three times, while a kink is detected.
GradCheck check_network_gradient(const NetworkModel& model, const Eigen::MatrixXd& batch,
                                 const Eigen::MatrixXd& weights, int per_layer, std::uint64_t seed,
                                 double step = 1e-3, double floor = 1e-7);

}  // namespace iqa::nn
