#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dirnn/rng.hpp"
#include "dirnn/tensor.hpp"

namespace dirnn {

enum class Norm { l2, linf };

inline const char* to_string(Norm n) { return n == Norm::l2 ? "2" : "inf"; }

// Small-distortion budgets. Desk defaults are the MNIST-class pair; the
// CIFAR-class pair is (0.03, 0.006).
struct SdSpec {
  float eps2 = 0.32f;
  float eps_inf = 0.06f;
  int samples_per_norm = 70;
};

enum class NaturalKind { shift, zoom, brightness, rotation, shearing, blur, contrast };

inline const char* to_string(NaturalKind k) {
  switch (k) {
    case NaturalKind::shift: return "shift";
    case NaturalKind::zoom: return "zoom";
    case NaturalKind::brightness: return "brightness";
    case NaturalKind::rotation: return "rotation";
    case NaturalKind::shearing: return "shearing";
    case NaturalKind::blur: return "blur";
    case NaturalKind::contrast: return "contrast";
  }
  return "?";
}

// Per-iteration step magnitudes for the seven natural families. Parameters are
// drawn uniformly within the step bound, `variants_per_kind` draws per family.
struct NaturalSpec {
  float shift_step = 0.3f;       // pixels, each axis
  float zoom_step = 0.03f;       // multiplicative, factor in 1 +/- step
  float brightness_step = 0.05f; // additive
  float rotation_step = 3.0f;    // degrees
  float shear_step = 0.03f;      // per axis
  float blur_sigma_lo = 0.3f;    // sigma drawn from {lo, hi}
  float blur_sigma_hi = 0.5f;
  float contrast_step = 0.05f;   // multiplicative about mid-gray
  int variants_per_kind = 4;

  NaturalSpec scaled(float f) const {
    NaturalSpec s = *this;
    s.shift_step *= f;
    s.zoom_step *= f;
    s.brightness_step *= f;
    s.rotation_step *= f;
    s.shear_step *= f;
    s.blur_sigma_lo *= f;
    s.blur_sigma_hi *= f;
    s.contrast_step *= f;
    return s;
  }
};

struct Transformation {
  enum class Family { identity, sd, natural };
  Family family = Family::identity;

  // sd
  Norm norm = Norm::l2;
  float epsilon = 0.0f;
  bool analytic = false;
  bool degenerate = false;  // zero-gradient projection
  Tensor delta;             // pre-clamp additive delta

  // natural
  NaturalKind kind = NaturalKind::shift;
  std::array<double, 2> params{0.0, 0.0};

  std::string describe() const {
    if (family == Family::identity) return "none";
    if (family == Family::sd) {
      std::string s = norm == Norm::l2 ? "sd_l2" : "sd_linf";
      if (analytic) s += "_analytic";
      return s;
    }
    return to_string(kind);
  }
};

inline Transformation identity_transformation() { return Transformation{}; }

// ---- analytic projections onto the eps-ball boundary -----------------------

// argmax_{|d|_2 <= eps} <h, d> = eps * h / |h|_2; the attained gain is
// eps * |h|_2. A zero gradient has no preferred direction and is flagged.
inline Transformation project_l2(const Tensor& h, float eps) {
  Transformation t;
  t.family = Transformation::Family::sd;
  t.norm = Norm::l2;
  t.epsilon = eps;
  t.analytic = true;
  t.delta = Tensor(h.shape());
  const double n = l2_norm(h);
  if (n == 0.0) {
    t.degenerate = true;
    return t;
  }
  const double s = double(eps) / n;
  for (std::size_t i = 0; i < h.size(); ++i) t.delta[i] = float(s * double(h[i]));
  return t;
}

// argmax_{|d|_inf <= eps} <h, d> = eps * sign(h); attained gain eps * |h|_1.
inline Transformation project_linf(const Tensor& h, float eps) {
  Transformation t;
  t.family = Transformation::Family::sd;
  t.norm = Norm::linf;
  t.epsilon = eps;
  t.analytic = true;
  t.delta = Tensor(h.shape());
  bool all_zero = true;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] > 0.0f) {
      t.delta[i] = eps;
      all_zero = false;
    } else if (h[i] < 0.0f) {
      t.delta[i] = -eps;
      all_zero = false;
    }
  }
  t.degenerate = all_zero;
  return t;
}

inline Transformation project(const Tensor& h, Norm norm, float eps) {
  return norm == Norm::l2 ? project_l2(h, eps) : project_linf(h, eps);
}

// Optimal first-order gain attainable inside the ball (Cauchy-Schwarz for l2,
// Hoelder for linf).
inline double projection_gain(const Tensor& h, Norm norm, float eps) {
  return norm == Norm::l2 ? double(eps) * l2_norm(h) : double(eps) * l1_norm(h);
}

// ---- SD sampling -----------------------------------------------------------

// linf: every coordinate gets magnitude eps scaled by U(0.5, 1) and a random
// sign. l2: isotropic Gaussian direction rescaled onto the eps sphere.
inline Transformation sample_sd(Rng& rng, Norm norm, float eps, const std::vector<int>& shape) {
  Transformation t;
  t.family = Transformation::Family::sd;
  t.norm = norm;
  t.epsilon = eps;
  t.delta = Tensor(shape);
  if (norm == Norm::linf) {
    std::uniform_int_distribution<int> sign(0, 1);
    std::uniform_real_distribution<double> mag(0.5, 1.0);
    for (std::size_t i = 0; i < t.delta.size(); ++i) {
      const float m = float(double(eps) * mag(rng));
      t.delta[i] = sign(rng) ? m : -m;
    }
  } else {
    std::normal_distribution<double> gauss(0.0, 1.0);
    double norm2 = 0.0;
    std::vector<double> raw(t.delta.size());
    for (double& v : raw) {
      v = gauss(rng);
      norm2 += v * v;
    }
    const double s = norm2 > 0.0 ? double(eps) / std::sqrt(norm2) : 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) t.delta[i] = float(raw[i] * s);
  }
  return t;
}

// ---- natural transformations ----------------------------------------------

namespace detail {

// Inverse-map resampling: out(r, c) samples in() at
//   src = A * (p - center) + center - shift
// with bilinear interpolation and zero padding outside the frame.
inline Tensor affine_sample(const Tensor& img, double a00, double a01, double a10, double a11,
                            double shift_x, double shift_y) {
  const int ch = img.shape()[0], h = img.shape()[1], w = img.shape()[2];
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  Tensor out(img.shape());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double px = c - cx, py = r - cy;
      const double sx = a00 * px + a01 * py + cx - shift_x;
      const double sy = a10 * px + a11 * py + cy - shift_y;
      const int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
      const double wx = sx - x0, wy = sy - y0;
      for (int k = 0; k < ch; ++k) {
        auto tap = [&](int yy, int xx) -> double {
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0.0;
          return img.at3(k, yy, xx);
        };
        const double v = (1 - wy) * ((1 - wx) * tap(y0, x0) + wx * tap(y0, x0 + 1)) +
                         wy * ((1 - wx) * tap(y0 + 1, x0) + wx * tap(y0 + 1, x0 + 1));
        out.at3(k, r, c) = float(v);
      }
    }
  }
  return out;
}

// Separable Gaussian; border taps are renormalized by the in-bounds kernel
// mass, so a constant image is an exact fixed point.
inline Tensor gaussian_blur(const Tensor& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));

  const int ch = img.shape()[0], h = img.shape()[1], w = img.shape()[2];
  Tensor mid(img.shape()), out(img.shape());
  for (int c = 0; c < ch; ++c) {
    for (int r = 0; r < h; ++r)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0, mass = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int xx = x + i;
          if (xx < 0 || xx >= w) continue;
          acc += k[i + radius] * img.at3(c, r, xx);
          mass += k[i + radius];
        }
        mid.at3(c, r, x) = float(acc / mass);
      }
    for (int r = 0; r < h; ++r)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0, mass = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int rr = r + i;
          if (rr < 0 || rr >= h) continue;
          acc += k[i + radius] * mid.at3(c, rr, x);
          mass += k[i + radius];
        }
        out.at3(c, r, x) = float(acc / mass);
      }
  }
  return out;
}

inline Tensor apply_natural(const Tensor& img, NaturalKind kind, const std::array<double, 2>& p) {
  switch (kind) {
    case NaturalKind::shift:
      return affine_sample(img, 1, 0, 0, 1, p[0], p[1]);
    case NaturalKind::zoom: {
      const double inv = 1.0 / p[0];
      return affine_sample(img, inv, 0, 0, inv, 0, 0);
    }
    case NaturalKind::rotation: {
      // content rotates by theta; the sampling map uses the inverse rotation
      const double th = p[0] * 3.14159265358979323846 / 180.0;
      const double c = std::cos(th), s = std::sin(th);
      return affine_sample(img, c, s, -s, c, 0, 0);
    }
    case NaturalKind::shearing: {
      const double kx = p[0], ky = p[1];
      const double det = 1.0 - kx * ky;
      return affine_sample(img, 1.0 / det, -kx / det, -ky / det, 1.0 / det, 0, 0);
    }
    case NaturalKind::brightness: {
      Tensor out = img;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = float(out[i] + p[0]);
      return out;
    }
    case NaturalKind::contrast: {
      Tensor out = img;
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = float(0.5 + p[0] * (double(out[i]) - 0.5));
      return out;
    }
    case NaturalKind::blur:
      return gaussian_blur(img, p[0]);
  }
  return img;
}

}  // namespace detail

// Applies a transformation to an image-domain tensor and clamps to [0, 1].
// The caller computes the realized delta as apply(t, x) - x; clamping can make
// it smaller than the nominal delta.
inline Tensor apply(const Transformation& t, const Tensor& x) {
  Tensor out;
  switch (t.family) {
    case Transformation::Family::identity:
      return x;
    case Transformation::Family::sd:
      out = x;
      axpy(out, 1.0f, t.delta);
      break;
    case Transformation::Family::natural:
      out = detail::apply_natural(x, t.kind, t.params);
      break;
  }
  clamp01(out);
  return out;
}

inline Transformation make_natural(NaturalKind kind, double p0, double p1 = 0.0) {
  Transformation t;
  t.family = Transformation::Family::natural;
  t.kind = kind;
  t.params = {p0, p1};
  return t;
}

// Seven families in fixed order, `variants_per_kind` draws each. Draw order is
// part of the determinism contract.
inline std::vector<Transformation> sample_natural(Rng& rng, const NaturalSpec& spec) {
  std::vector<Transformation> out;
  out.reserve(7 * spec.variants_per_kind);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto sym = [&](double step) { return (2.0 * u01(rng) - 1.0) * step; };
  for (int kind = 0; kind < 7; ++kind) {
    for (int v = 0; v < spec.variants_per_kind; ++v) {
      switch (NaturalKind(kind)) {
        case NaturalKind::shift:
          out.push_back(make_natural(NaturalKind::shift, sym(spec.shift_step), sym(spec.shift_step)));
          break;
        case NaturalKind::zoom:
          out.push_back(make_natural(NaturalKind::zoom, 1.0 + sym(spec.zoom_step)));
          break;
        case NaturalKind::brightness:
          out.push_back(make_natural(NaturalKind::brightness, sym(spec.brightness_step)));
          break;
        case NaturalKind::rotation:
          out.push_back(make_natural(NaturalKind::rotation, sym(spec.rotation_step)));
          break;
        case NaturalKind::shearing:
          out.push_back(
              make_natural(NaturalKind::shearing, sym(spec.shear_step), sym(spec.shear_step)));
          break;
        case NaturalKind::blur:
          out.push_back(make_natural(NaturalKind::blur,
                                     u01(rng) < 0.5 ? spec.blur_sigma_lo : spec.blur_sigma_hi));
          break;
        case NaturalKind::contrast:
          out.push_back(make_natural(NaturalKind::contrast, 1.0 + sym(spec.contrast_step)));
          break;
      }
    }
  }
  return out;
}

}  // namespace dirnn
