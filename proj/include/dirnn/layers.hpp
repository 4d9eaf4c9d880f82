#pragma once

#include <algorithm>
#include <variant>
#include <vector>

#include "dirnn/tensor.hpp"

namespace dirnn {

struct Dense {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
};

struct Conv2d {
  Tensor kernel;  // [out_c, in_c, kh, kw]
  Tensor bias;    // [out_c]
  int stride = 1;
  int pad = 0;
};

struct Relu {};

struct AvgPool {
  int window = 2;  // stride == window, non-overlapping
};

struct MaxPool {
  int window = 2;
};

struct Flatten {};

using Layer = std::variant<Dense, Conv2d, Relu, AvgPool, MaxPool, Flatten>;

inline Dense make_dense(int out, int in) {
  return Dense{Tensor({out, in}), Tensor({out})};
}

inline Conv2d make_conv2d(int out_c, int in_c, int kh, int kw, int stride = 1, int pad = 0) {
  Conv2d c{Tensor({out_c, in_c, kh, kw}), Tensor({out_c}), stride, pad};
  return c;
}

inline std::vector<int> output_shape(const Layer& layer, const std::vector<int>& in) {
  return std::visit(
      [&](const auto& l) -> std::vector<int> {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Dense>) {
          if (in.size() != 1 || in[0] != l.weight.shape()[1])
            throw dimension_error("Dense: input " + shape_string(in) + " incompatible with weight " +
                                  shape_string(l.weight.shape()));
          return {l.weight.shape()[0]};
        } else if constexpr (std::is_same_v<T, Conv2d>) {
          if (in.size() != 3 || in[0] != l.kernel.shape()[1])
            throw dimension_error("Conv2d: input " + shape_string(in) + " incompatible with kernel " +
                                  shape_string(l.kernel.shape()));
          const int kh = l.kernel.shape()[2], kw = l.kernel.shape()[3];
          const int ho = (in[1] + 2 * l.pad - kh) / l.stride + 1;
          const int wo = (in[2] + 2 * l.pad - kw) / l.stride + 1;
          if (ho < 1 || wo < 1) throw dimension_error("Conv2d: output collapses to zero");
          return {l.kernel.shape()[0], ho, wo};
        } else if constexpr (std::is_same_v<T, AvgPool> || std::is_same_v<T, MaxPool>) {
          if (in.size() != 3) throw dimension_error("Pool: expected [C,H,W] input");
          const int w = l.window;
          if (w < 1 || in[1] % w != 0 || in[2] % w != 0)
            throw dimension_error("Pool: window must tile " + shape_string(in) + " exactly");
          return {in[0], in[1] / w, in[2] / w};
        } else if constexpr (std::is_same_v<T, Flatten>) {
          int n = 1;
          for (int d : in) n *= d;
          return {n};
        } else {  // Relu
          return in;
        }
      },
      layer);
}

inline std::size_t param_count(const Layer& layer) {
  return std::visit(
      [](const auto& l) -> std::size_t {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Dense>)
          return l.weight.size() + l.bias.size();
        else if constexpr (std::is_same_v<T, Conv2d>)
          return l.kernel.size() + l.bias.size();
        else
          return 0;
      },
      layer);
}

namespace detail {

inline void dense_forward(const Dense& l, const Tensor& in, Tensor& out) {
  const int rows = l.weight.shape()[0], cols = l.weight.shape()[1];
  for (int i = 0; i < rows; ++i) {
    double acc = l.bias[i];
    const float* w = l.weight.data() + static_cast<std::size_t>(i) * cols;
    for (int j = 0; j < cols; ++j) acc += static_cast<double>(w[j]) * in[j];
    out[i] = static_cast<float>(acc);
  }
}

inline void conv2d_forward(const Conv2d& l, const Tensor& in, Tensor& out) {
  const int oc_n = out.shape()[0], ho = out.shape()[1], wo = out.shape()[2];
  const int ic_n = in.shape()[0], hi = in.shape()[1], wi = in.shape()[2];
  const int kh = l.kernel.shape()[2], kw = l.kernel.shape()[3];
  for (int oc = 0; oc < oc_n; ++oc) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        double acc = l.bias[oc];
        const int y0 = oy * l.stride - l.pad;
        const int x0 = ox * l.stride - l.pad;
        for (int ic = 0; ic < ic_n; ++ic) {
          const float* kbase =
              l.kernel.data() + ((static_cast<std::size_t>(oc) * ic_n + ic) * kh) * kw;
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= hi) continue;
            const float* row = in.data() + (static_cast<std::size_t>(ic) * hi + iy) * wi;
            const float* krow = kbase + static_cast<std::size_t>(ky) * kw;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= wi) continue;
              acc += static_cast<double>(row[ix]) * krow[kx];
            }
          }
        }
        out.at3(oc, oy, ox) = static_cast<float>(acc);
      }
    }
  }
}

inline void relu_forward(const Tensor& in, Tensor& out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
}

inline void avgpool_forward(int w, const Tensor& in, Tensor& out) {
  const int c_n = out.shape()[0], ho = out.shape()[1], wo = out.shape()[2];
  const double inv = 1.0 / (static_cast<double>(w) * w);
  for (int c = 0; c < c_n; ++c)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        double acc = 0.0;
        for (int dy = 0; dy < w; ++dy)
          for (int dx = 0; dx < w; ++dx) acc += in.at3(c, oy * w + dy, ox * w + dx);
        out.at3(c, oy, ox) = static_cast<float>(acc * inv);
      }
}

inline void maxpool_forward(int w, const Tensor& in, Tensor& out) {
  const int c_n = out.shape()[0], ho = out.shape()[1], wo = out.shape()[2];
  for (int c = 0; c < c_n; ++c)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        float m = in.at3(c, oy * w, ox * w);
        for (int dy = 0; dy < w; ++dy)
          for (int dx = 0; dx < w; ++dx) m = std::max(m, in.at3(c, oy * w + dy, ox * w + dx));
        out.at3(c, oy, ox) = m;
      }
}

inline void layer_forward(const Layer& layer, const Tensor& in, Tensor& out) {
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Dense>)
          dense_forward(l, in, out);
        else if constexpr (std::is_same_v<T, Conv2d>)
          conv2d_forward(l, in, out);
        else if constexpr (std::is_same_v<T, Relu>)
          relu_forward(in, out);
        else if constexpr (std::is_same_v<T, AvgPool>)
          avgpool_forward(l.window, in, out);
        else if constexpr (std::is_same_v<T, MaxPool>)
          maxpool_forward(l.window, in, out);
        else  // Flatten: same data, new shape
          for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i];
      },
      layer);
}

struct LayerGrads {
  Tensor weight;  // empty for parameter-free layers
  Tensor bias;
};

// g_out is d(scalar)/d(layer output); fills g_in and, when pg != nullptr,
// accumulates parameter gradients into it.
inline void dense_backward(const Dense& l, const Tensor& in, const Tensor& g_out, Tensor& g_in,
                           LayerGrads* pg) {
  const int rows = l.weight.shape()[0], cols = l.weight.shape()[1];
  for (int j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (int i = 0; i < rows; ++i)
      acc += static_cast<double>(l.weight.at2(i, j)) * g_out[i];
    g_in[j] = static_cast<float>(acc);
  }
  if (pg) {
    for (int i = 0; i < rows; ++i) {
      const float g = g_out[i];
      float* wrow = pg->weight.data() + static_cast<std::size_t>(i) * cols;
      for (int j = 0; j < cols; ++j) wrow[j] += g * in[j];
      pg->bias[i] += g;
    }
  }
}

inline void conv2d_backward(const Conv2d& l, const Tensor& in, const Tensor& g_out, Tensor& g_in,
                            LayerGrads* pg) {
  const int oc_n = g_out.shape()[0], ho = g_out.shape()[1], wo = g_out.shape()[2];
  const int ic_n = in.shape()[0], hi = in.shape()[1], wi = in.shape()[2];
  const int kh = l.kernel.shape()[2], kw = l.kernel.shape()[3];
  g_in.fill(0.0f);
  for (int oc = 0; oc < oc_n; ++oc) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        const float g = g_out.at3(oc, oy, ox);
        if (pg) pg->bias[oc] += g;
        const int y0 = oy * l.stride - l.pad;
        const int x0 = ox * l.stride - l.pad;
        for (int ic = 0; ic < ic_n; ++ic) {
          const std::size_t kbase = ((static_cast<std::size_t>(oc) * ic_n + ic) * kh) * kw;
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= hi) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= wi) continue;
              g_in.at3(ic, iy, ix) += l.kernel[kbase + ky * kw + kx] * g;
              if (pg) pg->weight[kbase + ky * kw + kx] += in.at3(ic, iy, ix) * g;
            }
          }
        }
      }
    }
  }
}

// ReLU subgradient at exactly 0 is taken as 0.
inline void relu_backward(const Tensor& in, const Tensor& g_out, Tensor& g_in) {
  for (std::size_t i = 0; i < in.size(); ++i) g_in[i] = in[i] > 0.0f ? g_out[i] : 0.0f;
}

inline void avgpool_backward(int w, const Tensor& g_out, Tensor& g_in) {
  const int c_n = g_out.shape()[0], ho = g_out.shape()[1], wo = g_out.shape()[2];
  const float inv = 1.0f / static_cast<float>(w * w);
  for (int c = 0; c < c_n; ++c)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        const float g = g_out.at3(c, oy, ox) * inv;
        for (int dy = 0; dy < w; ++dy)
          for (int dx = 0; dx < w; ++dx) g_in.at3(c, oy * w + dy, ox * w + dx) = g;
      }
}

// Gradient routes to the first maximum in row-major scan order; ties beyond it
// get zero, matching the forward pass's deterministic argmax.
inline void maxpool_backward(int w, const Tensor& in, const Tensor& g_out, Tensor& g_in) {
  const int c_n = g_out.shape()[0], ho = g_out.shape()[1], wo = g_out.shape()[2];
  g_in.fill(0.0f);
  for (int c = 0; c < c_n; ++c)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        int by = oy * w, bx = ox * w;
        float best = in.at3(c, by, bx);
        for (int dy = 0; dy < w; ++dy)
          for (int dx = 0; dx < w; ++dx) {
            const float v = in.at3(c, oy * w + dy, ox * w + dx);
            if (v > best) {
              best = v;
              by = oy * w + dy;
              bx = ox * w + dx;
            }
          }
        g_in.at3(c, by, bx) += g_out.at3(c, oy, ox);
      }
}

inline void layer_backward(const Layer& layer, const Tensor& in, const Tensor& g_out, Tensor& g_in,
                           LayerGrads* pg) {
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Dense>)
          dense_backward(l, in, g_out, g_in, pg);
        else if constexpr (std::is_same_v<T, Conv2d>)
          conv2d_backward(l, in, g_out, g_in, pg);
        else if constexpr (std::is_same_v<T, Relu>)
          relu_backward(in, g_out, g_in);
        else if constexpr (std::is_same_v<T, AvgPool>)
          avgpool_backward(l.window, g_out, g_in);
        else if constexpr (std::is_same_v<T, MaxPool>)
          maxpool_backward(l.window, in, g_out, g_in);
        else
          for (std::size_t i = 0; i < g_out.size(); ++i) g_in[i] = g_out[i];
      },
      layer);
}

}  // namespace detail
}  // namespace dirnn
