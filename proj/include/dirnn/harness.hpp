#pragma once

#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dirnn/dataset.hpp"
#include "dirnn/ranking.hpp"
#include "dirnn/transforms.hpp"

namespace dirnn {

enum class Scope { sd, natural, mixed };

inline const char* to_string(Scope s) {
  switch (s) {
    case Scope::sd: return "sd";
    case Scope::natural: return "natural";
    case Scope::mixed: return "mixed";
  }
  return "?";
}

inline Scope parse_scope(const std::string& name) {
  if (name == "sd") return Scope::sd;
  if (name == "natural") return Scope::natural;
  if (name == "mixed") return Scope::mixed;
  throw config_error("unknown scope '" + name + "' (valid: sd,natural,mixed)");
}

struct HarnessConfig {
  MetricKind metric = MetricKind::BL;
  Scope scope = Scope::sd;
  int iterations = 5;
  bool metamorphic = false;  // pseudo labels from the model's own predictions
  SdSpec sd;
  NaturalSpec natural;
  int nc_k = 100;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct IterationRecord {
  int iteration = 0;  // 0 = untransformed seeds
  std::vector<std::uint8_t> correct;
  SummaryStat accuracy;
  double mean_delta_l2 = 0.0;  // mean realized per-step ||dx||_2
};

struct SelectionRecord {
  int input_id = 0;
  int iteration = 0;
  std::string transform;  // "none" at iteration 0
  double delta_l2 = 0.0;
  int correct = 0;
};

struct AdaptiveResult {
  HarnessConfig config;
  std::vector<int> input_ids;     // included seeds, ascending dataset index
  std::vector<int> excluded_ids;  // standard mode: misclassified at iteration 0
  std::vector<int> labels_used;   // ground-truth or pseudo, per included seed
  IterationRecord clean;          // iteration 0, untransformed seeds
  std::vector<IterationRecord> iterations;  // exactly config.iterations records
  std::vector<SelectionRecord> selections;  // grouped by input, then iteration (incl. 0)
  std::vector<Tensor> final_inputs;
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t w = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += w) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Candidate pool for one iteration, in the frozen id order: linf SD block,
// l2 SD block, natural block, then (gradient metrics only) the two analytic
// best-SD candidates. Analytic candidates need the seed gradients, so they
// are appended by the scoring step, not here.
inline std::vector<Transformation> sample_candidates(Rng& rng, const HarnessConfig& cfg,
                                                     const std::vector<int>& shape) {
  std::vector<Transformation> cands;
  if (cfg.scope != Scope::natural) {
    for (int i = 0; i < cfg.sd.samples_per_norm; ++i)
      cands.push_back(sample_sd(rng, Norm::linf, cfg.sd.eps_inf, shape));
    for (int i = 0; i < cfg.sd.samples_per_norm; ++i)
      cands.push_back(sample_sd(rng, Norm::l2, cfg.sd.eps2, shape));
  }
  if (cfg.scope != Scope::sd) {
    for (Transformation& t : sample_natural(rng, cfg.natural)) cands.push_back(std::move(t));
  }
  return cands;
}

struct InputTrajectory {
  int input_id = 0;
  std::vector<std::string> kinds;
  std::vector<double> deltas;
  std::vector<std::uint8_t> correct;
  Tensor final_input;
};

// One greedy trajectory: per iteration, sample candidates, score them under
// the configured metric, keep the best as the next seed (beam width 1), and
// spend one confirmation forward on it.
inline InputTrajectory run_input(const Network& net, const Tensor& seed, int label, int input_id,
                                 const HarnessConfig& cfg, const NcProfile* nc_profile) {
  Rng rng = make_rng(derive_seed(cfg.seed, std::uint64_t(input_id)));
  InputTrajectory traj;
  traj.input_id = input_id;
  traj.kinds.push_back("none");
  traj.deltas.push_back(0.0);
  traj.correct.push_back(1);  // included seeds are correct at iteration 0 by construction

  Tensor x = seed;
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    std::vector<Transformation> cands = sample_candidates(rng, cfg, x.shape());

    // materialize candidate images; scoring may reuse them
    std::vector<Tensor> images;
    images.reserve(cands.size() + 2);
    for (const Transformation& t : cands) images.push_back(apply(t, x));

    std::vector<double> scores;
    scores.reserve(cands.size() + 2);
    const MetricKind m = cfg.metric;
    if (m == MetricKind::FM || m == MetricKind::FL) {
      for (const Tensor& img : images) {
        const Tensor logits = net.forward(img);
        scores.push_back(m == MetricKind::FM ? forward_margin(logits, label)
                                             : forward_loss(logits, label));
      }
    } else if (uses_gradients(m)) {
      SeedScorer scorer(net, x, label);
      const bool loss_head = (m == MetricKind::BL || m == MetricKind::ML);
      if (cfg.scope != Scope::natural) {
        for (Norm norm : {Norm::linf, Norm::l2}) {
          const float eps = norm == Norm::linf ? cfg.sd.eps_inf : cfg.sd.eps2;
          Transformation t = scorer.analytic_best_sd(norm, eps, loss_head);
          images.push_back(apply(t, x));
          cands.push_back(std::move(t));
        }
      }
      for (const Tensor& img : images) {
        switch (m) {
          case MetricKind::BM: scores.push_back(scorer.backward_margin(sub(img, x))); break;
          case MetricKind::BL: scores.push_back(scorer.backward_loss(sub(img, x))); break;
          case MetricKind::MM: scores.push_back(scorer.mixed_margin(img, cfg.sd.eps2)); break;
          default: scores.push_back(scorer.mixed_loss(img, cfg.sd.eps2)); break;
        }
      }
    } else if (m == MetricKind::NC) {
      const auto seed_sections = nc_sections(*nc_profile, net.activations_at(x, nc_profile->layer));
      for (const Tensor& img : images)
        scores.push_back(
            nc_score_from(*nc_profile, seed_sections, net.activations_at(img, nc_profile->layer)));
    } else {  // BD / BDF
      const int layer = bd_layer(net, m == MetricKind::BDF);
      const Tensor seed_act = net.activations_at(x, layer);
      for (const Tensor& img : images)
        scores.push_back(bd_from_activations(seed_act, net.activations_at(img, layer)));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[best]) best = i;

    // one confirmation forward on the winner
    const int pred = Network::argmax(net.forward(images[best]));
    traj.kinds.push_back(cands[best].describe());
    traj.deltas.push_back(l2_norm(sub(images[best], x)));
    traj.correct.push_back(pred == label ? 1 : 0);
    x = std::move(images[best]);
  }
  traj.final_input = std::move(x);
  return traj;
}

}  // namespace detail

// Standard adaptive testing: ground-truth labels, seeds the model already
// misclassifies are excluded from every denominator and reported separately.
// Metamorphic mode keeps every seed and tests against pseudo labels
// (the model's own prediction on the untransformed input), so iteration 0
// scores 1.0 by construction.
inline AdaptiveResult adaptive_test(const Network& net, const Dataset& seeds,
                                    const HarnessConfig& cfg,
                                    const NcProfile* nc_profile = nullptr) {
  if (cfg.iterations < 1) throw config_error("adaptive_test: iterations must be >= 1");
  if (cfg.metric == MetricKind::NC && !nc_profile)
    throw config_error("adaptive_test: NC requires a coverage profile");
  std::size_t pool = 0;
  if (cfg.scope != Scope::natural)
    pool += 2u * std::size_t(std::max(cfg.sd.samples_per_norm, 0)) +
            (uses_gradients(cfg.metric) ? 2u : 0u);
  if (cfg.scope != Scope::sd) pool += 7u * std::size_t(std::max(cfg.natural.variants_per_kind, 0));
  if (pool == 0) throw config_error("adaptive_test: empty candidate set");
  if (!cfg.metamorphic) seeds.validate(net.num_classes());

  AdaptiveResult result;
  result.config = cfg;

  std::vector<int> labels;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const int pred = net.classify(seeds.images[i]);
    if (cfg.metamorphic) {
      result.input_ids.push_back(int(i));
      labels.push_back(pred);
    } else if (pred == seeds.labels[i]) {
      result.input_ids.push_back(int(i));
      labels.push_back(seeds.labels[i]);
    } else {
      result.excluded_ids.push_back(int(i));
    }
  }
  result.labels_used = labels;

  const std::size_t n = result.input_ids.size();
  std::vector<detail::InputTrajectory> trajectories(n);
  detail::parallel_for(n, cfg.workers, [&](std::size_t slot) {
    const int id = result.input_ids[slot];
    trajectories[slot] =
        detail::run_input(net, seeds.images[id], labels[slot], id, cfg, nc_profile);
  });

  for (int iter = 0; iter <= cfg.iterations; ++iter) {
    IterationRecord rec;
    rec.iteration = iter;
    std::vector<double> bits;
    double delta_sum = 0.0;
    for (const auto& traj : trajectories) {
      rec.correct.push_back(traj.correct[iter]);
      bits.push_back(double(traj.correct[iter]));
      delta_sum += traj.deltas[iter];
    }
    rec.accuracy = mean_ci(bits);
    rec.mean_delta_l2 = n ? delta_sum / double(n) : 0.0;
    if (iter == 0)
      result.clean = std::move(rec);
    else
      result.iterations.push_back(std::move(rec));
  }

  for (const auto& traj : trajectories) {
    for (int iter = 0; iter <= cfg.iterations; ++iter) {
      SelectionRecord row;
      row.input_id = traj.input_id;
      row.iteration = iter;
      row.transform = traj.kinds[iter];
      row.delta_l2 = traj.deltas[iter];
      row.correct = traj.correct[iter];
      result.selections.push_back(std::move(row));
    }
    result.final_inputs.push_back(traj.final_input);
  }
  return result;
}

inline AdaptiveResult metamorphic_test(const Network& net, const Dataset& seeds,
                                       HarnessConfig cfg, const NcProfile* nc_profile = nullptr) {
  cfg.metamorphic = true;
  return adaptive_test(net, seeds, cfg, nc_profile);
}

// ---- RQ1-style ranking correlation ----------------------------------------

struct Rq1Cell {
  MetricKind a = MetricKind::FM, b = MetricKind::FM;
  SummaryStat stat;
};

struct Rq1Result {
  HarnessConfig config;
  std::vector<MetricKind> metrics;
  std::vector<Rq1Cell> table;  // all unordered pairs, fixed metric order
  SummaryStat candidate_norm;  // mean realized ||dx||_2 over candidates
  double p_used = kRboPersistence;
};

// One shared candidate pool per input, ranked under every metric; agreement is
// the truncated RBO of each ranking pair, averaged over inputs.
inline Rq1Result rq1_correlation(const Network& net, const Dataset& seeds,
                                 const HarnessConfig& cfg, const NcProfile& nc_profile,
                                 double p = kRboPersistence) {
  seeds.validate(net.num_classes());
  if (seeds.size() == 0) throw config_error("rq1_correlation: empty seed set");
  std::size_t pool = 0;
  if (cfg.scope != Scope::natural) pool += 2u * std::size_t(std::max(cfg.sd.samples_per_norm, 0));
  if (cfg.scope != Scope::sd) pool += 7u * std::size_t(std::max(cfg.natural.variants_per_kind, 0));
  if (pool < 2) throw config_error("rq1_correlation: needs at least two candidates");

  Rq1Result result;
  result.config = cfg;
  result.metrics = all_metrics();
  result.p_used = p;
  const std::size_t m = result.metrics.size();

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);

  const std::size_t n = seeds.size();
  std::vector<std::vector<double>> rbo_samples(pairs.size(), std::vector<double>(n, 0.0));
  std::vector<double> norm_samples(n, 0.0);

  detail::parallel_for(n, cfg.workers, [&](std::size_t idx) {
    const Tensor& x = seeds.images[idx];
    const int label = seeds.labels[idx];
    Rng rng = make_rng(derive_seed(cfg.seed, std::uint64_t(idx)));
    const std::vector<Transformation> cands = detail::sample_candidates(rng, cfg, x.shape());

    const auto seed_all = net.forward_all(x);
    const int mid = middle_layer(net);
    const auto seed_sections = nc_sections(nc_profile, seed_all[nc_profile.layer]);
    SeedScorer scorer(net, x, label);

    std::vector<std::vector<ScoredCandidate>> scored(m);
    for (auto& v : scored) v.reserve(cands.size());
    double norm_sum = 0.0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const Tensor img = apply(cands[c], x);
      const Tensor delta = sub(img, x);
      const double dnorm = l2_norm(delta);
      norm_sum += dnorm;
      const auto outs = net.forward_all(img);
      const Tensor& logits = outs.back();
      const bool near = dnorm <= double(cfg.sd.eps2);
      for (std::size_t k = 0; k < m; ++k) {
        double score = 0.0;
        switch (result.metrics[k]) {
          case MetricKind::FM: score = forward_margin(logits, label); break;
          case MetricKind::FL: score = forward_loss(logits, label); break;
          case MetricKind::BM: score = scorer.backward_margin(delta); break;
          case MetricKind::BL: score = scorer.backward_loss(delta); break;
          case MetricKind::MM:
            score = near ? scorer.backward_margin(delta) : forward_margin(logits, label);
            break;
          case MetricKind::ML:
            score = near ? scorer.backward_loss(delta) : forward_loss(logits, label);
            break;
          case MetricKind::NC:
            score = nc_score_from(nc_profile, seed_sections, outs[nc_profile.layer]);
            break;
          case MetricKind::BD:
            score = bd_from_activations(seed_all[mid], outs[mid]);
            break;
          case MetricKind::BDF:
            score = bd_from_activations(seed_all.back(), logits);
            break;
        }
        scored[k].push_back({int(c), score});
      }
    }

    std::vector<std::vector<int>> rankings(m);
    for (std::size_t k = 0; k < m; ++k) rankings[k] = rank_candidates(scored[k]);
    for (std::size_t pi = 0; pi < pairs.size(); ++pi)
      rbo_samples[pi][idx] = rbo(rankings[pairs[pi].first], rankings[pairs[pi].second], p);
    norm_samples[idx] = norm_sum / double(cands.size());
  });

  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    Rq1Cell cell;
    cell.a = result.metrics[pairs[pi].first];
    cell.b = result.metrics[pairs[pi].second];
    cell.stat = mean_ci(rbo_samples[pi]);
    result.table.push_back(cell);
  }
  result.candidate_norm = mean_ci(norm_samples);
  return result;
}

inline const Rq1Cell& rq1_lookup(const Rq1Result& r, MetricKind a, MetricKind b) {
  for (const Rq1Cell& cell : r.table)
    if ((cell.a == a && cell.b == b) || (cell.a == b && cell.b == a)) return cell;
  throw config_error("rq1_lookup: pair not present");
}

}  // namespace dirnn
