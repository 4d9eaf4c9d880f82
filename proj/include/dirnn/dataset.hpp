#pragma once

#include <vector>

#include "dirnn/tensor.hpp"

namespace dirnn {

struct Dataset {
  std::vector<Tensor> images;
  std::vector<int> labels;

  std::size_t size() const { return images.size(); }

  void validate(int num_classes) const {
    if (images.size() != labels.size())
      throw dimension_error("Dataset: image/label count mismatch");
    for (int l : labels)
      if (l < 0 || l >= num_classes) throw dimension_error("Dataset: label out of range");
  }

  Dataset subset(std::size_t offset, std::size_t count) const {
    Dataset out;
    for (std::size_t i = offset; i < std::min(offset + count, size()); ++i) {
      out.images.push_back(images[i]);
      out.labels.push_back(labels[i]);
    }
    return out;
  }
};

}  // namespace dirnn
