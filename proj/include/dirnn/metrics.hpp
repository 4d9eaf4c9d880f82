#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dirnn/gradient.hpp"
#include "dirnn/transforms.hpp"

namespace dirnn {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Directed metrics (FM/FL forward, BM/BL backward, MM/ML mixed) and diversity
// baselines (NC neuron coverage, BD/BDF distribution divergence).
enum class MetricKind { FM, FL, BM, BL, MM, ML, NC, BD, BDF };

inline const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::FM: return "FM";
    case MetricKind::FL: return "FL";
    case MetricKind::BM: return "BM";
    case MetricKind::BL: return "BL";
    case MetricKind::MM: return "MM";
    case MetricKind::ML: return "ML";
    case MetricKind::NC: return "NC";
    case MetricKind::BD: return "BD";
    case MetricKind::BDF: return "BDF";
  }
  return "?";
}

inline const std::vector<MetricKind>& all_metrics() {
  static const std::vector<MetricKind> all = {MetricKind::FM, MetricKind::FL, MetricKind::BM,
                                              MetricKind::BL, MetricKind::MM, MetricKind::ML,
                                              MetricKind::NC, MetricKind::BD, MetricKind::BDF};
  return all;
}

inline MetricKind parse_metric(const std::string& name) {
  for (MetricKind m : all_metrics())
    if (name == to_string(m)) return m;
  std::string valid;
  for (MetricKind m : all_metrics()) {
    if (!valid.empty()) valid += ",";
    valid += to_string(m);
  }
  throw config_error("unknown metric '" + name + "' (valid: " + valid + ")");
}

// BM/BL/MM/ML consume seed gradients and earn the analytic SD candidates.
inline bool uses_gradients(MetricKind m) {
  return m == MetricKind::BM || m == MetricKind::BL || m == MetricKind::MM || m == MetricKind::ML;
}

// ---- scalar heads ----------------------------------------------------------

// Cross-entropy of softmax(logits) against `label`, with the usual max-shifted
// log-sum-exp, all in double.
inline double ce_loss(const Tensor& logits, int label) {
  double zmax = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) zmax = std::max<double>(zmax, logits[i]);
  double lse = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) lse += std::exp(double(logits[i]) - zmax);
  return std::log(lse) + zmax - double(logits[label]);
}

// d(CE)/d(logits) = softmax(logits) - e_label.
inline Tensor ce_dlogits(const Tensor& logits, int label) {
  double zmax = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) zmax = std::max<double>(zmax, logits[i]);
  double lse = 0.0;
  std::vector<double> e(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(double(logits[i]) - zmax);
    lse += e[i];
  }
  Tensor d(logits.shape());
  for (std::size_t i = 0; i < logits.size(); ++i)
    d[i] = float(e[i] / lse - (int(i) == label ? 1.0 : 0.0));
  return d;
}

// max_{j != i} (z_j - z_i): nonnegative exactly when some wrong class matches
// or beats the label.
inline double forward_margin(const Tensor& logits, int label) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (int(j) != label) best = std::max(best, double(logits[j]) - double(logits[label]));
  return best;
}

inline double forward_loss(const Tensor& logits, int label) { return ce_loss(logits, label); }

// First-order estimate f(a) + <grad, delta> of f(a + delta).
inline double linear_estimate(double value, const Tensor& grad, const Tensor& delta) {
  return value + dot(grad, delta);
}

// ---- backward / mixed scoring ---------------------------------------------

// Everything derivable from one seed: one forward pass at construction, then
// gradients materialize lazily (1 backward for the loss head, l-1 for the
// margin heads) and are reused across any number of candidate deltas.
class SeedScorer {
 public:
  SeedScorer(const Network& net, Tensor x, int label)
      : net_(&net), label_(label), cache_(net, std::move(x)) {}

  const Network& net() const { return *net_; }
  const Tensor& input() const { return cache_.input(); }
  int label() const { return label_; }
  const Tensor& seed_logits() const { return cache_.logits(); }

  double backward_loss(const Tensor& delta) {
    ensure_loss_grad();
    return linear_estimate(loss_value_, loss_grad_, delta);
  }

  double backward_margin(const Tensor& delta) {
    ensure_margin_grads();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < margin_grads_.size(); ++j)
      best = std::max(best, linear_estimate(margin_values_[j], margin_grads_[j], delta));
    return best;
  }

  // Dispatch on the realized step size: inside (or on) the l2 budget the
  // linear estimate is trusted, outside it the candidate is executed.
  double mixed_loss(const Tensor& x_prime, float eps2) {
    Tensor delta = sub(x_prime, cache_.input());
    if (l2_norm(delta) <= double(eps2)) return backward_loss(delta);
    return forward_loss(net_->forward(x_prime), label_);
  }

  double mixed_margin(const Tensor& x_prime, float eps2) {
    Tensor delta = sub(x_prime, cache_.input());
    if (l2_norm(delta) <= double(eps2)) return backward_margin(delta);
    return forward_margin(net_->forward(x_prime), label_);
  }

  // Closed-form argmax of the backward score over the eps-ball (loss head:
  // project the loss gradient; margin head: best wrong class after adding the
  // per-class optimal gain).
  Transformation analytic_best_sd(Norm norm, float eps, bool loss_head) {
    if (loss_head) {
      ensure_loss_grad();
      return project(loss_grad_, norm, eps);
    }
    ensure_margin_grads();
    std::size_t best = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < margin_grads_.size(); ++j) {
      const double gain = margin_values_[j] + projection_gain(margin_grads_[j], norm, eps);
      if (gain > best_gain) {
        best_gain = gain;
        best = j;
      }
    }
    return project(margin_grads_[best], norm, eps);
  }

 private:
  void ensure_loss_grad() {
    if (has_loss_grad_) return;
    loss_value_ = ce_loss(cache_.logits(), label_);
    loss_grad_ = cache_.backward(ce_dlogits(cache_.logits(), label_));
    has_loss_grad_ = true;
  }

  void ensure_margin_grads() {
    if (!margin_grads_.empty()) return;
    const int n = net_->num_classes();
    margin_grads_.reserve(n - 1);
    margin_values_.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == label_) continue;
      Tensor d({n});
      d[j] = 1.0f;
      d[label_] = -1.0f;
      margin_values_.push_back(double(cache_.logits()[j]) - double(cache_.logits()[label_]));
      margin_grads_.push_back(cache_.backward(d));
    }
  }

  const Network* net_;
  int label_;
  ForwardCache cache_;
  bool has_loss_grad_ = false;
  double loss_value_ = 0.0;
  Tensor loss_grad_;
  std::vector<double> margin_values_;  // g_ji at the seed, j != label
  std::vector<Tensor> margin_grads_;
};

// ---- neuron coverage (k-multisection) --------------------------------------

// Per-neuron activation ranges observed on training data at one layer. A value
// lands in one of k equal-width sections, or in a corner region below/above
// the profiled range.
struct NcProfile {
  int layer = 0;
  int k = 100;
  std::vector<float> lo, hi;
};

inline NcProfile build_nc_profile(const Network& net, const std::vector<Tensor>& images, int layer,
                                  int k) {
  if (images.empty()) throw config_error("build_nc_profile: empty profiling set");
  NcProfile p;
  p.layer = layer;
  p.k = k;
  const std::size_t n = Tensor::numel_of(net.layer_shape(layer));
  p.lo.assign(n, std::numeric_limits<float>::infinity());
  p.hi.assign(n, -std::numeric_limits<float>::infinity());
  for (const Tensor& img : images) {
    Tensor act = net.activations_at(img, layer);
    for (std::size_t i = 0; i < n; ++i) {
      p.lo[i] = std::min(p.lo[i], act[i]);
      p.hi[i] = std::max(p.hi[i], act[i]);
    }
  }
  return p;
}

// Section index in [0, k+1]: 0 = below range, k+1 = above, 1..k = bins.
inline int nc_section(const NcProfile& p, std::size_t neuron, float v) {
  const float lo = p.lo[neuron], hi = p.hi[neuron];
  if (v < lo) return 0;
  if (v > hi) return p.k + 1;
  if (hi == lo) return 1;  // degenerate range: single interior section
  const int bin = int((double(v) - lo) / (double(hi) - lo) * p.k);
  return 1 + std::min(bin, p.k - 1);
}

inline std::vector<std::uint16_t> nc_sections(const NcProfile& p, const Tensor& act) {
  std::vector<std::uint16_t> s(act.size());
  for (std::size_t i = 0; i < act.size(); ++i) s[i] = std::uint16_t(nc_section(p, i, act[i]));
  return s;
}

// Fraction of neurons whose section under x' differs from the seed's.
inline double nc_score_from(const NcProfile& p, const std::vector<std::uint16_t>& seed_sections,
                            const Tensor& act_prime) {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < seed_sections.size(); ++i)
    if (nc_section(p, i, act_prime[i]) != int(seed_sections[i])) ++changed;
  return double(changed) / double(seed_sections.size());
}

inline double nc_score(const NcProfile& p, const Network& net, const Tensor& x,
                       const Tensor& x_prime) {
  const auto seed = nc_sections(p, net.activations_at(x, p.layer));
  return nc_score_from(p, seed, net.activations_at(x_prime, p.layer));
}

// ---- distribution divergence ----------------------------------------------

// l2 distance between unit-normalized activation vectors; zero vectors are
// compared as-is. Orthogonal nonzero activations sit at sqrt(2).
inline double bd_from_activations(const Tensor& a, const Tensor& b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  const double sa = na > 0.0 ? 1.0 / na : 1.0;
  const double sb = nb > 0.0 ? 1.0 / nb : 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) * sa - double(b[i]) * sb;
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline double bd_divergence(const Network& net, const Tensor& x, const Tensor& x_prime,
                            int layer) {
  return bd_from_activations(net.activations_at(x, layer), net.activations_at(x_prime, layer));
}

// BD profiles the middle layer; BDF the final (logit) layer.
inline int bd_layer(const Network& net, bool final_layer) {
  return final_layer ? net.depth() - 1 : middle_layer(net);
}

}  // namespace dirnn
