#pragma once

#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "dirnn/dataset.hpp"
#include "dirnn/metrics.hpp"
#include "dirnn/rng.hpp"

namespace dirnn {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 500;
  float lr = 0.1f;
  float momentum = 0.9f;
  float weight_decay = 5e-4f;
  std::uint64_t seed = 0;
  int log_every = 0;  // print a progress line every n epochs; 0 = silent
};

struct TrainStats {
  std::vector<double> epoch_loss;  // mean CE per epoch
};

// Kaiming-uniform fan-in init: weights U(-b, b) with b = sqrt(6 / fan_in),
// biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
inline void kaiming_init(Network& net, Rng& rng) {
  auto fill = [&](Tensor& w, Tensor& b, int fan_in) {
    const float wb = std::sqrt(6.0f / float(fan_in));
    const float bb = 1.0f / std::sqrt(float(fan_in));
    std::uniform_real_distribution<float> uw(-wb, wb), ub(-bb, bb);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = uw(rng);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = ub(rng);
  };
  for (Layer& l : net.layers()) {
    if (auto* d = std::get_if<Dense>(&l)) {
      fill(d->weight, d->bias, d->weight.shape()[1]);
    } else if (auto* c = std::get_if<Conv2d>(&l)) {
      const auto& ks = c->kernel.shape();
      fill(c->kernel, c->bias, ks[1] * ks[2] * ks[3]);
    }
  }
}

// Minibatch SGD:  v <- momentum * v + (grad + weight_decay * w);  w <- w - lr * v.
// Gradients are averaged over the batch; sample order within a batch is the
// shuffled epoch order, so runs are reproducible from the seed alone.
inline TrainStats train_sgd(Network& net, const Dataset& data, const TrainConfig& cfg) {
  data.validate(net.num_classes());
  if (data.size() == 0) throw config_error("train_sgd: empty dataset");
  if (cfg.batch_size < 1) throw config_error("train_sgd: batch_size must be positive");

  Rng rng = make_rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0u);

  ParamGrads grads = ParamGrads::zeros_like(net);
  ParamGrads velocity = ParamGrads::zeros_like(net);

  TrainStats stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const float inv_batch = 1.0f / float(end - start);
      grads.zero();
      double batch_loss = 0.0;
      for (std::size_t s = start; s < end; ++s) {
        const std::size_t idx = order[s];
        ForwardCache cache(net, data.images[idx]);
        batch_loss += ce_loss(cache.logits(), data.labels[idx]);
        cache.backward(ce_dlogits(cache.logits(), data.labels[idx]), &grads);
      }
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train_sgd: non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += batch_loss;

      for (int li = 0; li < net.depth(); ++li) {
        auto& g = grads.layers[li];
        if (g.weight.empty()) continue;
        auto& v = velocity.layers[li];
        Tensor* w = nullptr;
        Tensor* b = nullptr;
        if (auto* d = std::get_if<Dense>(&net.layers()[li])) {
          w = &d->weight;
          b = &d->bias;
        } else if (auto* c = std::get_if<Conv2d>(&net.layers()[li])) {
          w = &c->kernel;
          b = &c->bias;
        }
        for (std::size_t i = 0; i < w->size(); ++i) {
          v.weight[i] = cfg.momentum * v.weight[i] +
                        (g.weight[i] * inv_batch + cfg.weight_decay * (*w)[i]);
          (*w)[i] -= cfg.lr * v.weight[i];
        }
        for (std::size_t i = 0; i < b->size(); ++i) {
          v.bias[i] = cfg.momentum * v.bias[i] +
                      (g.bias[i] * inv_batch + cfg.weight_decay * (*b)[i]);
          (*b)[i] -= cfg.lr * v.bias[i];
        }
      }
    }
    stats.epoch_loss.push_back(epoch_loss / double(data.size()));
    if (cfg.log_every > 0 && (epoch + 1) % cfg.log_every == 0)
      std::fprintf(stderr, "epoch %d/%d  loss %.4f\n", epoch + 1, cfg.epochs,
                   stats.epoch_loss.back());
  }
  return stats;
}

inline double evaluate_accuracy(const Network& net, const Dataset& data) {
  if (data.size() == 0) throw config_error("evaluate_accuracy: empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (net.classify(data.images[i]) == data.labels[i]) ++hits;
  return double(hits) / double(data.size());
}

}  // namespace dirnn
