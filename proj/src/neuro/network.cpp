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

#include "iqa/error.hpp"
#include "iqa/neuro.hpp"
#include "iqa/rng.hpp"

namespace iqa::nn {

std::size_t NetworkModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& h : heads)
    for (const auto& l : h.layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<std::string> NetworkModel::head_names() const {
  std::vector<std::string> names;
  for (const auto& h : heads) names.push_back(h.name);
  return names;
}

void NetworkModel::validate() const {
  require(input_dim > 0, "network input dimension must be positive");
  require(!heads.empty(), "network needs at least one head");
  for (const auto& h : heads) {
    require(!h.layers.empty(), "head '" + h.name + "' has no layers");
    int in = input_dim;
    for (const auto& l : h.layers) {
      require(l.in_dim() == in, "head '" + h.name + "': layer input dimension does not match the previous layer");
      require(l.bias.size() == l.weight.rows(), "head '" + h.name + "': bias length does not match layer width");
      require(l.dropout >= 0.0 && l.dropout < 1.0, "dropout rate must lie in [0, 1)");
      in = l.out_dim();
    }
    require(in == 1, "head '" + h.name + "' must end in a single output neuron");
  }
}

bool same_parameters(const NetworkModel& a, const NetworkModel& b) {
  if (a.input_dim != b.input_dim || a.heads.size() != b.heads.size()) return false;
  for (std::size_t k = 0; k < a.heads.size(); ++k) {
    const auto& ha = a.heads[k];
    const auto& hb = b.heads[k];
    if (ha.name != hb.name || ha.layers.size() != hb.layers.size()) return false;
    for (std::size_t l = 0; l < ha.layers.size(); ++l) {
      const auto& la = ha.layers[l];
      const auto& lb = hb.layers[l];
      if (la.activation != lb.activation || la.dropout != lb.dropout) return false;
      if (la.weight.rows() != lb.weight.rows() || la.weight.cols() != lb.weight.cols()) return false;
      if (la.weight != lb.weight || la.bias != lb.bias) return false;
    }
  }
  return true;
}

NetworkModel build_network(int input_dim, const std::vector<std::vector<LayerSpec>>& heads,
                           const std::vector<std::string>& names, std::uint64_t seed) {
  require(input_dim > 0, "network input dimension must be positive");
  require(!heads.empty(), "network needs at least one head");
  require(names.empty() || names.size() == heads.size(), "one name per head is required");
  NetworkModel model;
  model.input_dim = input_dim;
  for (std::size_t k = 0; k < heads.size(); ++k) {
    Head head;
    head.name = names.empty() ? "task" + std::to_string(k) : names[k];
    int in = input_dim;
    for (std::size_t l = 0; l < heads[k].size(); ++l) {
      const auto& spec = heads[k][l];
      require(spec.units > 0, "layer width must be positive");
      DenseLayer layer;
      layer.activation = spec.activation;
      layer.dropout = spec.dropout;
      layer.weight.resize(spec.units, in);
      layer.bias = Eigen::VectorXd::Zero(spec.units);
      Rng rng(mix_seed(mix_seed(seed, k), l));
      const double stddev = std::sqrt(2.0 / in);
      for (int r = 0; r < spec.units; ++r)
        for (int c = 0; c < in; ++c) layer.weight(r, c) = stddev * rng.normal();
      head.layers.push_back(std::move(layer));
      in = spec.units;
    }
    model.heads.push_back(std::move(head));
  }
  model.validate();
  return model;
}

NetworkModel build_mtl_head(int input_dim, int k, std::uint64_t seed, std::vector<std::string> names) {
  require(k >= 1, "MTL head needs K >= 1");
  const std::vector<LayerSpec> head{
      {512, Activation::kReLU, 0.25}, {256, Activation::kReLU, 0.5}, {1, Activation::kLinear, 0.0}};
  return build_network(input_dim, std::vector<std::vector<LayerSpec>>(k, head), names, seed);
}

NetworkModel build_regressor(int input_dim, std::uint64_t seed) {
  const std::vector<LayerSpec> head{{2048, Activation::kReLU, 0.25},
                                    {1024, Activation::kReLU, 0.25},
                                    {256, Activation::kReLU, 0.5},
                                    {1, Activation::kLinear, 0.0}};
  return build_network(input_dim, {head}, {"quality"}, seed);
}

Eigen::MatrixXd forward(const NetworkModel& model, const Eigen::MatrixXd& batch, Mode mode, std::uint64_t seed,
                        ForwardCache* cache) {
  if (batch.cols() != model.input_dim)
    fail(ErrorCode::kInvalidArgument, "forward: batch has " + std::to_string(batch.cols()) +
                                          " features, model expects " + std::to_string(model.input_dim));
  const Eigen::Index n = batch.rows();
  Eigen::MatrixXd pred(n, static_cast<Eigen::Index>(model.heads.size()));
  if (cache) {
    cache->model = &model;
    cache->revision = model.revision;
    cache->input = batch;
    cache->pre.assign(model.heads.size(), {});
    cache->out.assign(model.heads.size(), {});
    cache->mask.assign(model.heads.size(), {});
  }
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    const auto& layers = model.heads[k].layers;
    Eigen::MatrixXd a = batch;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      Eigen::MatrixXd z(n, layer.out_dim());
      z.noalias() = a * layer.weight.transpose();
      z.rowwise() += layer.bias.transpose();
      Eigen::MatrixXd out = layer.activation == Activation::kReLU ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
      Eigen::MatrixXd mask;
      if (mode == Mode::kTrain && layer.dropout > 0.0) {
        Rng rng(mix_seed(mix_seed(seed, k), l));
        const double keep = 1.0 - layer.dropout;
        mask.resize(n, layer.out_dim());
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
        out.array() *= mask.array();
      }
      if (cache) {
        cache->pre[k].push_back(std::move(z));
        cache->mask[k].push_back(std::move(mask));
        cache->out[k].push_back(out);
      }
      a = std::move(out);
    }
    pred.col(static_cast<Eigen::Index>(k)) = a.col(0);
  }
  return pred;
}

Gradients backward(const NetworkModel& model, const ForwardCache& cache, const Eigen::MatrixXd& dpred) {
  if (cache.model != &model || cache.revision != model.revision || cache.pre.size() != model.heads.size())
    fail(ErrorCode::kInvalidArgument, "backward: stale forward cache (model changed since the forward pass)");
  const Eigen::Index n = cache.input.rows();
  require(dpred.rows() == n && dpred.cols() == static_cast<Eigen::Index>(model.heads.size()),
          "backward: loss gradient shape does not match the forward batch");
  Gradients g;
  g.heads.resize(model.heads.size());
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    const auto& layers = model.heads[k].layers;
    g.heads[k].resize(layers.size());
    Eigen::MatrixXd da = dpred.col(static_cast<Eigen::Index>(k));
    for (std::size_t li = layers.size(); li-- > 0;) {
      const auto& layer = layers[li];
      if (cache.mask[k][li].size() > 0) da.array() *= cache.mask[k][li].array();
      if (layer.activation == Activation::kReLU)
        da.array() *= (cache.pre[k][li].array() > 0.0).cast<double>();
      const Eigen::MatrixXd& a_prev = li == 0 ? cache.input : cache.out[k][li - 1];
      g.heads[k][li].weight.noalias() = da.transpose() * a_prev;
      g.heads[k][li].bias = da.colwise().sum().transpose();
      if (li > 0) {
        Eigen::MatrixXd next(n, layer.in_dim());
        next.noalias() = da * layer.weight;
        da = std::move(next);
      }
    }
  }
  return g;
}

AdamState AdamState::for_model(const NetworkModel& model) {
  AdamState s;
  for (const auto& h : model.heads) {
    std::vector<LayerGrad> zeros;
    for (const auto& l : h.layers)
      zeros.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    s.m.heads.push_back(zeros);
    s.v.heads.push_back(std::move(zeros));
  }
  return s;
}

void adam_step(AdamState& state, NetworkModel& model, const Gradients& grads, double lr) {
  require(grads.heads.size() == model.heads.size() && state.m.heads.size() == model.heads.size(),
          "adam_step: gradient/state shapes do not match the model");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    require(param.size() == g.size(), "adam_step: gradient shape mismatch");
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  for (std::size_t k = 0; k < model.heads.size(); ++k)
    for (std::size_t l = 0; l < model.heads[k].layers.size(); ++l) {
      auto& layer = model.heads[k].layers[l];
      update(layer.weight, grads.heads[k][l].weight, state.m.heads[k][l].weight, state.v.heads[k][l].weight);
      update(layer.bias, grads.heads[k][l].bias, state.m.heads[k][l].bias, state.v.heads[k][l].bias);
    }
  model.revision += 1;
}

}  // namespace iqa::nn
