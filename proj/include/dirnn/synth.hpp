#pragma once

#include <array>
#include <cmath>

#include "dirnn/dataset.hpp"
#include "dirnn/rng.hpp"
#include "dirnn/transforms.hpp"

namespace dirnn {

// Deterministic MNIST-format stand-in: 5x7 bitmap-font digits rendered into a
// 28x28 canvas through a randomized affine map, then blurred and lightly
// corrupted. Image i depends only on (seed, i), so any prefix of a generated
// set is stable. Labels cycle 0..9 for exact class balance.

struct SynthSpec {
  float shift = 2.0f;          // px, each axis
  float rotation = 8.0f;       // degrees
  float scale_lo = 0.9f;
  float scale_hi = 1.1f;
  float shear = 0.08f;
  float cell_px = 2.6f;        // glyph cell size on the canvas
  float blur_lo = 0.4f;
  float blur_hi = 0.8f;
  float intensity_lo = 0.75f;
  float intensity_hi = 1.0f;
  float noise = 0.02f;         // Gaussian pixel noise sigma
};

namespace detail {

inline const std::array<std::array<const char*, 7>, 10>& glyphs() {
  static const std::array<std::array<const char*, 7>, 10> g = {{
      {"01110", "10001", "10011", "10101", "11001", "10001", "01110"},  // 0
      {"00100", "01100", "00100", "00100", "00100", "00100", "01110"},  // 1
      {"01110", "10001", "00001", "00010", "00100", "01000", "11111"},  // 2
      {"01110", "10001", "00001", "00110", "00001", "10001", "01110"},  // 3
      {"00010", "00110", "01010", "10010", "11111", "00010", "00010"},  // 4
      {"11111", "10000", "11110", "00001", "00001", "10001", "01110"},  // 5
      {"00110", "01000", "10000", "11110", "10001", "10001", "01110"},  // 6
      {"11111", "00001", "00010", "00100", "01000", "01000", "01000"},  // 7
      {"01110", "10001", "10001", "01110", "10001", "10001", "01110"},  // 8
      {"01110", "10001", "10001", "01111", "00001", "00010", "01100"},  // 9
  }};
  return g;
}

// Bilinear sample of the 0/1 glyph grid at continuous (row, col); zero
// outside, which doubles as the background.
inline double glyph_tap(int digit, double row, double col) {
  const auto& g = glyphs()[digit];
  const int r0 = int(std::floor(row)), c0 = int(std::floor(col));
  const double wr = row - r0, wc = col - c0;
  auto cell = [&](int r, int c) -> double {
    if (r < 0 || r >= 7 || c < 0 || c >= 5) return 0.0;
    return g[r][c] == '1' ? 1.0 : 0.0;
  };
  return (1 - wr) * ((1 - wc) * cell(r0, c0) + wc * cell(r0, c0 + 1)) +
         wr * ((1 - wc) * cell(r0 + 1, c0) + wc * cell(r0 + 1, c0 + 1));
}

}  // namespace detail

inline Tensor render_synth_digit(int digit, Rng& rng, const SynthSpec& spec) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto sym = [&](double s) { return (2.0 * u01(rng) - 1.0) * s; };

  const double theta = sym(spec.rotation) * 3.14159265358979323846 / 180.0;
  const double scale = spec.scale_lo + u01(rng) * (spec.scale_hi - spec.scale_lo);
  const double shear_x = sym(spec.shear);
  const double dx = sym(spec.shift), dy = sym(spec.shift);
  const double intensity = spec.intensity_lo + u01(rng) * (spec.intensity_hi - spec.intensity_lo);
  const double sigma = spec.blur_lo + u01(rng) * (spec.blur_hi - spec.blur_lo);

  // canvas pixel -> glyph grid: undo shift, rotation, shear, scale, cell size
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double cell = spec.cell_px * scale;
  Tensor img({1, 28, 28});
  const double cx = 13.5, cy = 13.5;
  for (int r = 0; r < 28; ++r) {
    for (int c = 0; c < 28; ++c) {
      const double px = (c - cx - dx), py = (r - cy - dy);
      const double rx = cos_t * px + sin_t * py;   // inverse rotation
      const double ry = -sin_t * px + cos_t * py;
      const double sx = rx - shear_x * ry;         // inverse shear (x only)
      const double gcol = sx / cell + 2.0;         // glyph center (col 2, row 3)
      const double grow = ry / cell + 3.0;
      img.at3(0, r, c) = float(detail::glyph_tap(digit, grow, gcol) * intensity);
    }
  }

  img = detail::gaussian_blur(img, sigma);
  std::normal_distribution<double> noise(0.0, spec.noise);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = float(img[i] + noise(rng));
  clamp01(img);
  return img;
}

inline Dataset make_synth_digits(int count, std::uint64_t seed, const SynthSpec& spec = {}) {
  Dataset d;
  d.images.reserve(count);
  d.labels.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng = make_rng(derive_seed(seed, std::uint64_t(i)));
    const int digit = i % 10;
    d.images.push_back(render_synth_digit(digit, rng, spec));
    d.labels.push_back(digit);
  }
  return d;
}

}  // namespace dirnn
