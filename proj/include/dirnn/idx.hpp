#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "dirnn/dataset.hpp"

namespace dirnn {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw io_error("idx: truncated while reading " + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// IDX image file -> [1, H, W] float tensors scaled to [0, 1] by 1/255.
inline std::vector<Tensor> read_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("idx: cannot open " + path);
  const std::uint32_t magic = detail::read_be32(in, "magic");
  if (magic != kIdxImagesMagic)
    throw io_error("idx: magic mismatch in " + path + " (expected image magic 0x803)");
  const std::uint32_t n = detail::read_be32(in, "count");
  const std::uint32_t h = detail::read_be32(in, "height");
  const std::uint32_t w = detail::read_be32(in, "width");
  if (h == 0 || w == 0 || h > 4096 || w > 4096)
    throw io_error("idx: implausible image dimensions in " + path);

  std::vector<Tensor> images;
  images.reserve(n);
  std::vector<unsigned char> row(std::size_t(h) * w);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(row.data()), row.size()))
      throw io_error("idx: truncated payload in " + path);
    Tensor img({1, int(h), int(w)});
    for (std::size_t j = 0; j < row.size(); ++j) img[j] = float(row[j]) / 255.0f;
    images.push_back(std::move(img));
  }
  return images;
}

inline std::vector<int> read_idx_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("idx: cannot open " + path);
  const std::uint32_t magic = detail::read_be32(in, "magic");
  if (magic != kIdxLabelsMagic)
    throw io_error("idx: magic mismatch in " + path + " (expected label magic 0x801)");
  const std::uint32_t n = detail::read_be32(in, "count");
  std::vector<unsigned char> raw(n);
  if (n && !in.read(reinterpret_cast<char*>(raw.data()), n))
    throw io_error("idx: truncated payload in " + path);
  return std::vector<int>(raw.begin(), raw.end());
}

inline Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path) {
  Dataset d;
  d.images = read_idx_images(images_path);
  d.labels = read_idx_labels(labels_path);
  if (d.images.size() != d.labels.size())
    throw io_error("idx: count mismatch between " + images_path + " (" +
                   std::to_string(d.images.size()) + ") and " + labels_path + " (" +
                   std::to_string(d.labels.size()) + ")");
  return d;
}

inline void write_idx_images(const std::string& path, const std::vector<Tensor>& images) {
  if (images.empty()) throw io_error("idx: refusing to write empty image file");
  const auto& shape = images.front().shape();
  if (shape.size() != 3 || shape[0] != 1) throw io_error("idx: writer expects [1,H,W] images");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("idx: cannot write " + path);
  detail::write_be32(out, kIdxImagesMagic);
  detail::write_be32(out, std::uint32_t(images.size()));
  detail::write_be32(out, std::uint32_t(shape[1]));
  detail::write_be32(out, std::uint32_t(shape[2]));
  std::vector<unsigned char> row(images.front().size());
  for (const Tensor& img : images) {
    if (img.shape() != shape) throw io_error("idx: inconsistent image shapes");
    for (std::size_t j = 0; j < img.size(); ++j) {
      const float v = img[j] * 255.0f + 0.5f;
      row[j] = static_cast<unsigned char>(v < 0.0f ? 0.0f : (v > 255.0f ? 255.0f : v));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw io_error("idx: write failed for " + path);
}

inline void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
  if (labels.empty()) throw io_error("idx: refusing to write empty label file");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("idx: cannot write " + path);
  detail::write_be32(out, kIdxLabelsMagic);
  detail::write_be32(out, std::uint32_t(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw io_error("idx: label out of byte range");
    const unsigned char b = static_cast<unsigned char>(l);
    out.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!out) throw io_error("idx: write failed for " + path);
}

}  // namespace dirnn
