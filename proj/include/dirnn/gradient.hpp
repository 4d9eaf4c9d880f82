#pragma once

#include <utility>
#include <vector>

#include "dirnn/network.hpp"

namespace dirnn {

// Per-layer parameter gradients, indexed like Network::layers(). Entries for
// parameter-free layers stay empty.
struct ParamGrads {
  std::vector<detail::LayerGrads> layers;

  static ParamGrads zeros_like(const Network& net) {
    ParamGrads pg;
    pg.layers.resize(net.depth());
    for (int i = 0; i < net.depth(); ++i) {
      if (const auto* d = std::get_if<Dense>(&net.layers()[i])) {
        pg.layers[i].weight = Tensor(d->weight.shape());
        pg.layers[i].bias = Tensor(d->bias.shape());
      } else if (const auto* c = std::get_if<Conv2d>(&net.layers()[i])) {
        pg.layers[i].weight = Tensor(c->kernel.shape());
        pg.layers[i].bias = Tensor(c->bias.shape());
      }
    }
    return pg;
  }

  void zero() {
    for (auto& g : layers) {
      g.weight.fill(0.0f);
      g.bias.fill(0.0f);
    }
  }
};

// One cached forward pass that can then answer any number of reverse-mode
// sweeps. Each backward() call seeds d(scalar)/d(logits) and walks the stack
// once, so k distinct scalar heads cost exactly 1 forward + k backward passes.
class ForwardCache {
 public:
  ForwardCache(const Network& net, Tensor x)
      : net_(&net), input_(std::move(x)), outs_(net.forward_all(input_)) {}

  const Network& net() const { return *net_; }
  const Tensor& input() const { return input_; }
  const Tensor& logits() const { return outs_.back(); }
  const Tensor& activation(int layer) const { return outs_.at(layer); }

  // d(scalar)/d(input) for the scalar whose logit gradient is `dlogits`.
  // When pg != nullptr also accumulates parameter gradients.
  Tensor backward(const Tensor& dlogits, ParamGrads* pg = nullptr) const {
    if (!same_shape(dlogits, outs_.back()))
      throw dimension_error("backward: dlogits shape mismatch");
    ++pass_counts().backward;
    Tensor g_out = dlogits;
    for (int i = net_->depth() - 1; i >= 0; --i) {
      const Tensor& layer_in = (i == 0) ? input_ : outs_[i - 1];
      Tensor g_in(layer_in.shape());
      detail::layer_backward(net_->layers()[i], layer_in, g_out, g_in,
                             pg ? &pg->layers[i] : nullptr);
      g_out = std::move(g_in);
    }
    return g_out;
  }

 private:
  const Network* net_;
  Tensor input_;
  std::vector<Tensor> outs_;
};

// Convenience wrapper: gradient of a scalar head at x. HeadFn maps logits to
// (value, dvalue/dlogits).
template <class HeadFn>
Tensor input_gradient(const Network& net, const Tensor& x, HeadFn&& head, double* value = nullptr) {
  ForwardCache cache(net, x);
  auto [v, dlogits] = head(cache.logits());
  if (value) *value = v;
  return cache.backward(dlogits);
}

}  // namespace dirnn
