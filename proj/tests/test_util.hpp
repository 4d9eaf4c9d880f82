#pragma once

// Shared helpers for building randomized small networks in tests.

#include <vector>

#include "dirnn/network.hpp"
#include "dirnn/rng.hpp"

namespace testutil {

inline void randomize(dirnn::Network& net, dirnn::Rng& rng, float scale = 0.5f) {
  std::uniform_real_distribution<float> u(-scale, scale);
  for (dirnn::Layer& l : net.layers())
    std::visit(
        [&](auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, dirnn::Dense>) {
            for (std::size_t i = 0; i < v.weight.size(); ++i) v.weight[i] = u(rng);
            for (std::size_t i = 0; i < v.bias.size(); ++i) v.bias[i] = u(rng);
          } else if constexpr (std::is_same_v<T, dirnn::Conv2d>) {
            for (std::size_t i = 0; i < v.kernel.size(); ++i) v.kernel[i] = u(rng);
            for (std::size_t i = 0; i < v.bias.size(); ++i) v.bias[i] = u(rng);
          }
        },
        l);
}

inline dirnn::Tensor random_input(const std::vector<int>& shape, dirnn::Rng& rng, float lo = -1.0f,
                                  float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  dirnn::Tensor x(shape);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(rng);
  return x;
}

// A rotation of small architectures covering every layer kind.
inline dirnn::Network small_net(int which, dirnn::Rng& rng) {
  using namespace dirnn;
  std::vector<Layer> layers;
  std::vector<int> in;
  switch (which % 5) {
    case 0:
      in = {6};
      layers = {Layer{make_dense(12, 6)}, Layer{Relu{}}, Layer{make_dense(4, 12)}};
      break;
    case 1:
      in = {1, 8, 8};
      layers = {Layer{make_conv2d(3, 1, 3, 3)}, Layer{Relu{}}, Layer{Flatten{}},
                Layer{make_dense(5, 3 * 6 * 6)}};
      break;
    case 2:
      in = {1, 8, 8};
      layers = {Layer{make_conv2d(2, 1, 3, 3, 1, 1)}, Layer{Relu{}}, Layer{MaxPool{2}},
                Layer{Flatten{}}, Layer{make_dense(4, 2 * 4 * 4)}};
      break;
    case 3:
      in = {2, 6, 6};
      layers = {Layer{make_conv2d(3, 2, 3, 3)}, Layer{AvgPool{2}}, Layer{Relu{}}, Layer{Flatten{}},
                Layer{make_dense(3, 3 * 2 * 2)}};
      break;
    default:
      in = {10};
      layers = {Layer{make_dense(16, 10)}, Layer{Relu{}}, Layer{make_dense(8, 16)}, Layer{Relu{}},
                Layer{make_dense(5, 8)}};
      break;
  }
  Network net(in, std::move(layers));
  randomize(net, rng);
  return net;
}

}  // namespace testutil
