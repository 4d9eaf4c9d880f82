#pragma once

#include <string>

#include "dirnn/metrics.hpp"
#include "dirnn/network.hpp"

namespace dirnn {

// 28x28 grayscale classifiers. Parameter counts: lenet1 3,246; lenet5 61,706.
// Weights are left zero; initialize with kaiming_init before training.

inline Network make_lenet1() {
  std::vector<Layer> layers;
  layers.push_back(make_conv2d(4, 1, 5, 5));
  layers.push_back(Relu{});
  layers.push_back(MaxPool{2});
  layers.push_back(make_conv2d(12, 4, 5, 5));
  layers.push_back(Relu{});
  layers.push_back(MaxPool{2});
  layers.push_back(Flatten{});
  layers.push_back(make_dense(10, 192));
  return Network({1, 28, 28}, std::move(layers));
}

inline Network make_lenet5() {
  std::vector<Layer> layers;
  layers.push_back(make_conv2d(6, 1, 5, 5, 1, 2));
  layers.push_back(Relu{});
  layers.push_back(MaxPool{2});
  layers.push_back(make_conv2d(16, 6, 5, 5));
  layers.push_back(Relu{});
  layers.push_back(MaxPool{2});
  layers.push_back(Flatten{});
  layers.push_back(make_dense(120, 400));
  layers.push_back(Relu{});
  layers.push_back(make_dense(84, 120));
  layers.push_back(Relu{});
  layers.push_back(make_dense(10, 84));
  return Network({1, 28, 28}, std::move(layers));
}

inline Network make_mlp() {
  std::vector<Layer> layers;
  layers.push_back(Flatten{});
  layers.push_back(make_dense(128, 784));
  layers.push_back(Relu{});
  layers.push_back(make_dense(64, 128));
  layers.push_back(Relu{});
  layers.push_back(make_dense(10, 64));
  return Network({1, 28, 28}, std::move(layers));
}

inline Network make_preset(const std::string& name) {
  if (name == "lenet1") return make_lenet1();
  if (name == "lenet5") return make_lenet5();
  if (name == "mlp") return make_mlp();
  throw config_error("unknown architecture '" + name + "' (valid: lenet1,lenet5,mlp)");
}

}  // namespace dirnn
