#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dirnn/layers.hpp"

namespace dirnn {

// Forward/backward pass bookkeeping. Counters are thread-local so a worker's
// budget accounting never sees another worker's passes. A "forward" is one
// propagation of one input through the stack (full or truncated); a "backward"
// is one input-gradient propagation from the logits.
struct PassCounts {
  std::uint64_t forward = 0;
  std::uint64_t backward = 0;
};

inline PassCounts& pass_counts() {
  thread_local PassCounts counts;
  return counts;
}

inline void reset_pass_counts() { pass_counts() = PassCounts{}; }

class Network {
 public:
  Network() = default;

  // Validates the whole shape chain up front; the final layer must emit a
  // 1-d class-score vector.
  Network(std::vector<int> input_shape, std::vector<Layer> layers)
      : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
    std::vector<int> cur = input_shape_;
    shapes_.reserve(layers_.size());
    for (const Layer& l : layers_) {
      cur = output_shape(l, cur);
      shapes_.push_back(cur);
    }
    if (layers_.empty() || cur.size() != 1 || cur[0] < 2)
      throw dimension_error("Network: final layer must produce class scores");
  }

  const std::vector<int>& input_shape() const { return input_shape_; }
  int num_classes() const { return shapes_.back()[0]; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  int depth() const { return static_cast<int>(layers_.size()); }
  const std::vector<int>& layer_shape(int idx) const { return shapes_.at(idx); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers_) n += dirnn::param_count(l);
    return n;
  }

  // Post-activation outputs of every layer; the last entry is the logits.
  // Costs one forward pass regardless of how many layers are read.
  std::vector<Tensor> forward_all(const Tensor& x) const {
    check_input(x);
    ++pass_counts().forward;
    std::vector<Tensor> outs;
    outs.reserve(layers_.size());
    const Tensor* cur = &x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Tensor out(shapes_[i]);
      detail::layer_forward(layers_[i], *cur, out);
      outs.push_back(std::move(out));
      cur = &outs.back();
    }
    return outs;
  }

  Tensor forward(const Tensor& x) const {
    check_input(x);
    ++pass_counts().forward;
    Tensor cur = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Tensor out(shapes_[i]);
      detail::layer_forward(layers_[i], cur, out);
      cur = std::move(out);
    }
    return cur;
  }

  // Output of layer `idx` (0-based); truncated propagation, one forward pass.
  Tensor activations_at(const Tensor& x, int idx) const {
    if (idx < 0 || idx >= depth()) throw dimension_error("activations_at: bad layer index");
    check_input(x);
    ++pass_counts().forward;
    Tensor cur = x;
    for (int i = 0; i <= idx; ++i) {
      Tensor out(shapes_[i]);
      detail::layer_forward(layers_[i], cur, out);
      cur = std::move(out);
    }
    return cur;
  }

  // argmax over class scores; ties resolve to the lowest index.
  static int argmax(const Tensor& scores) {
    int best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[best]) best = static_cast<int>(i);
    return best;
  }

  int classify(const Tensor& x) const { return argmax(forward(x)); }

 private:
  void check_input(const Tensor& x) const {
    if (x.shape() != input_shape_)
      throw dimension_error("Network: input " + shape_string(x.shape()) + ", expected " +
                            shape_string(input_shape_));
  }

  std::vector<int> input_shape_;
  std::vector<Layer> layers_;
  std::vector<std::vector<int>> shapes_;
};

// Index of the conventional "middle" feature layer used by NC and BD.
inline int middle_layer(const Network& net) { return net.depth() / 2; }

}  // namespace dirnn
