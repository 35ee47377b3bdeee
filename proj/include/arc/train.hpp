#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "arc/attacks.hpp"
#include "arc/dataset.hpp"
#include "arc/network.hpp"
#include "arc/rng.hpp"

namespace arc {

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  bool adversarial = false;
  double adv_eps = 8.0 / 255.0;  // Linf
  std::size_t adv_steps = 7;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Network network;
  double train_accuracy = 0.0;
  double final_epoch_loss = 0.0;
};

/// Minibatch SGD on softmax cross-entropy. With cfg.adversarial each batch
/// input is replaced by a PGD perturbation of itself before the step; the
/// PGD random starts draw from their own streams, so adv_eps = 0 reproduces
/// standard training exactly.
inline TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg) {
  require(data.size() > 0, ErrorCode::kInvalidArgument, "cannot train on an empty dataset");
  require(data.dim() == net.input_dim(), ErrorCode::kDimensionMismatch, "dataset dim does not match network input");
  require(data.num_classes <= net.num_classes(), ErrorCode::kDimensionMismatch,
          "dataset has more classes than the network outputs");
  require(cfg.learning_rate > 0.0 && cfg.batch_size > 0, ErrorCode::kInvalidArgument,
          "learning rate and batch size must be positive");
  if (cfg.adversarial)
    require(cfg.adv_eps >= 0.0 && cfg.adv_steps > 0, ErrorCode::kInvalidArgument, "bad adversarial-training budget");

  Rng shuffle_rng = derive_rng(cfg.seed, 0x7a11);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Matrix> gw;
  std::vector<Vector> gb;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    gw.emplace_back(net.weights()[l].rows(), net.weights()[l].cols());
    gb.emplace_back(net.biases()[l].size());
  }

  const LossSpec ce{LossKind::kCrossEntropy, LabelRule::kGroundTruth};
  const Budget adv_budget = Budget::with_default_step(Norm::kLinf, cfg.adv_eps, cfg.adv_steps);
  double epoch_loss = 0.0;
  std::uint64_t batch_counter = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (auto& m : gw) std::fill(m.values().begin(), m.values().end(), 0.0);
      for (auto& v : gb) std::fill(v.begin(), v.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        Vector x = data.inputs[i];
        if (cfg.adversarial && cfg.adv_eps > 0.0) {
          BimOptions o;
          o.random_start = true;
          o.seed = splitmix64(cfg.seed ^ (batch_counter * 0x100000001b3ULL + k));
          x = bim(net, x, data.labels[i], adv_budget, ce, o).adversarial;
        }
        ForwardTrace t = forward_trace(net, x);
        LossValue lv = loss_with_grad(ce, t.logits(), data.labels[i]);
        epoch_loss += lv.value;
        backward(net, t, std::move(lv.grad), &gw, &gb);
      }
      require(std::isfinite(epoch_loss), ErrorCode::kDivergence,
              "training diverged (non-finite loss) in epoch " + std::to_string(epoch));
      const double scale = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t l = 0; l < net.num_layers(); ++l) {
        auto& w = net.mutable_weights()[l].values();
        const auto& g = gw[l].values();
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= scale * g[j];
        auto& b = net.mutable_biases()[l];
        for (std::size_t j = 0; j < b.size(); ++j) b[j] -= scale * gb[l][j];
        require(all_finite(net.weights()[l].values()) && all_finite(b.span()), ErrorCode::kDivergence,
                "training diverged (non-finite parameters) in epoch " + std::to_string(epoch));
      }
      ++batch_counter;
    }
    epoch_loss /= static_cast<double>(data.size());
  }
  TrainResult r{std::move(net), 0.0, epoch_loss};
  r.train_accuracy = accuracy(r.network, data);
  return r;
}

}  // namespace arc
