#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>

#include "dirnn/idx.hpp"
#include "dirnn/network.hpp"

namespace dirnn {

// Binary model container, version 1. Little-endian throughout; weights are
// stored as raw float32 exactly as held in memory, so a save/load round trip
// reproduces logits bit for bit.
//
//   u32 magic 'DNN1' | u32 version | input shape (u32 ndim, u32 dims...)
//   u32 layer count  | per layer: u8 kind + parameters
//   metadata: u64 seed, u32 epochs, f32 final_accuracy

inline constexpr std::uint32_t kModelMagic = 0x314E4E44;  // "DNN1"
inline constexpr std::uint32_t kModelVersion = 1;

struct ModelMeta {
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;
  float final_accuracy = 0.0f;
};

namespace detail {

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const char* what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw io_error(std::string("model: truncated while reading ") + what);
  return v;
}

inline void put_tensor(std::ostream& out, const Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
}

inline void get_tensor(std::istream& in, Tensor& t, const char* what) {
  if (!in.read(reinterpret_cast<char*>(t.data()),
               std::streamsize(t.size() * sizeof(float))))
    throw io_error(std::string("model: truncated while reading ") + what);
}

enum LayerTag : std::uint8_t {
  kTagDense = 0,
  kTagConv2d = 1,
  kTagRelu = 2,
  kTagAvgPool = 3,
  kTagMaxPool = 4,
  kTagFlatten = 5,
};

}  // namespace detail

inline void save_model(const Network& net, const ModelMeta& meta, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("model: cannot write " + path);
  using namespace detail;
  put<std::uint32_t>(out, kModelMagic);
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, std::uint32_t(net.input_shape().size()));
  for (int d : net.input_shape()) put<std::uint32_t>(out, std::uint32_t(d));
  put<std::uint32_t>(out, std::uint32_t(net.depth()));
  for (const Layer& l : net.layers()) {
    if (const auto* d = std::get_if<Dense>(&l)) {
      put<std::uint8_t>(out, kTagDense);
      put<std::uint32_t>(out, std::uint32_t(d->weight.shape()[0]));
      put<std::uint32_t>(out, std::uint32_t(d->weight.shape()[1]));
      put_tensor(out, d->weight);
      put_tensor(out, d->bias);
    } else if (const auto* c = std::get_if<Conv2d>(&l)) {
      put<std::uint8_t>(out, kTagConv2d);
      for (int dim : c->kernel.shape()) put<std::uint32_t>(out, std::uint32_t(dim));
      put<std::int32_t>(out, c->stride);
      put<std::int32_t>(out, c->pad);
      put_tensor(out, c->kernel);
      put_tensor(out, c->bias);
    } else if (std::holds_alternative<Relu>(l)) {
      put<std::uint8_t>(out, kTagRelu);
    } else if (const auto* a = std::get_if<AvgPool>(&l)) {
      put<std::uint8_t>(out, kTagAvgPool);
      put<std::uint32_t>(out, std::uint32_t(a->window));
    } else if (const auto* m = std::get_if<MaxPool>(&l)) {
      put<std::uint8_t>(out, kTagMaxPool);
      put<std::uint32_t>(out, std::uint32_t(m->window));
    } else {
      put<std::uint8_t>(out, kTagFlatten);
    }
  }
  put<std::uint64_t>(out, meta.seed);
  put<std::uint32_t>(out, meta.epochs);
  put<float>(out, meta.final_accuracy);
  if (!out) throw io_error("model: write failed for " + path);
}

inline std::pair<Network, ModelMeta> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("model: cannot open " + path);
  using namespace detail;
  if (get<std::uint32_t>(in, "magic") != kModelMagic)
    throw io_error("model: magic mismatch in " + path);
  const std::uint32_t version = get<std::uint32_t>(in, "version");
  if (version != kModelVersion)
    throw io_error("model: unsupported version " + std::to_string(version) + " in " + path);

  const std::uint32_t ndim = get<std::uint32_t>(in, "input ndim");
  if (ndim == 0 || ndim > 4) throw io_error("model: implausible input rank in " + path);
  std::vector<int> input_shape(ndim);
  for (auto& d : input_shape) d = int(get<std::uint32_t>(in, "input dim"));

  const std::uint32_t count = get<std::uint32_t>(in, "layer count");
  if (count == 0 || count > 256) throw io_error("model: implausible layer count in " + path);
  std::vector<Layer> layers;
  layers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    switch (get<std::uint8_t>(in, "layer tag")) {
      case kTagDense: {
        const int out_n = int(get<std::uint32_t>(in, "dense rows"));
        const int in_n = int(get<std::uint32_t>(in, "dense cols"));
        Dense d = make_dense(out_n, in_n);
        get_tensor(in, d.weight, "dense weight");
        get_tensor(in, d.bias, "dense bias");
        layers.push_back(std::move(d));
        break;
      }
      case kTagConv2d: {
        const int oc = int(get<std::uint32_t>(in, "conv oc"));
        const int ic = int(get<std::uint32_t>(in, "conv ic"));
        const int kh = int(get<std::uint32_t>(in, "conv kh"));
        const int kw = int(get<std::uint32_t>(in, "conv kw"));
        const int stride = get<std::int32_t>(in, "conv stride");
        const int pad = get<std::int32_t>(in, "conv pad");
        Conv2d c = make_conv2d(oc, ic, kh, kw, stride, pad);
        get_tensor(in, c.kernel, "conv kernel");
        get_tensor(in, c.bias, "conv bias");
        layers.push_back(std::move(c));
        break;
      }
      case kTagRelu:
        layers.push_back(Relu{});
        break;
      case kTagAvgPool:
        layers.push_back(AvgPool{int(get<std::uint32_t>(in, "avgpool window"))});
        break;
      case kTagMaxPool:
        layers.push_back(MaxPool{int(get<std::uint32_t>(in, "maxpool window"))});
        break;
      case kTagFlatten:
        layers.push_back(Flatten{});
        break;
      default:
        throw io_error("model: unknown layer tag in " + path);
    }
  }

  ModelMeta meta;
  meta.seed = get<std::uint64_t>(in, "meta seed");
  meta.epochs = get<std::uint32_t>(in, "meta epochs");
  meta.final_accuracy = get<float>(in, "meta accuracy");

  try {
    return {Network(std::move(input_shape), std::move(layers)), meta};
  } catch (const dimension_error& e) {
    throw io_error("model: inconsistent architecture in " + path + ": " + e.what());
  }
}

}  // namespace dirnn
