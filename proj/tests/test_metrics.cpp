#include "dirnn/metrics.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace dirnn;

namespace {

Network identity_net(int n) {
  Tensor w({n, n});
  for (int i = 0; i < n; ++i) w.at2(i, i) = 1.0f;
  return Network({n}, {Layer{Dense{w, Tensor({n})}}});
}

}  // namespace

TEST(Heads, CrossEntropyFrozenValues) {
  // CE([2,0,0], label 0) = ln(1 + 2 e^-2)
  EXPECT_NEAR(ce_loss(Tensor({3}, {2, 0, 0}), 0), 0.23954476622188453, 1e-12);
  // uniform logits: CE = ln(num_classes), independent of the shared value
  EXPECT_NEAR(ce_loss(Tensor({3}, {5, 5, 5}), 1), 1.0986122886681098, 1e-12);
  EXPECT_NEAR(ce_loss(Tensor({3}, {-40, -40, -40}), 2), 1.0986122886681098, 1e-12);
  // shift invariance
  EXPECT_NEAR(ce_loss(Tensor({3}, {102, 100, 100}), 0), 0.23954476622188453, 1e-9);
}

TEST(Heads, CeGradientSumsToZero) {
  Tensor g = ce_dlogits(Tensor({4}, {1, -2, 0.5f, 3}), 2);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i];
  EXPECT_NEAR(s, 0.0, 1e-6);
  EXPECT_LT(g[2], 0.0f);  // label coordinate is softmax - 1
}

TEST(Heads, ForwardMargin) {
  EXPECT_DOUBLE_EQ(forward_margin(Tensor({3}, {2, 0, 0}), 0), -2.0);
  EXPECT_DOUBLE_EQ(forward_margin(Tensor({3}, {1, 3, 2}), 0), 2.0);
  EXPECT_DOUBLE_EQ(forward_margin(Tensor({3}, {2, 2, 0}), 0), 0.0);
}

TEST(Heads, LinearEstimateExample) {
  // f(x) = 0.5 x^2 linearized at a = 0.5, queried at x = 0.8:
  // 0.125 + 0.5 * 0.3 = 0.275 (true value 0.32)
  Tensor grad({1}, {0.5f});
  Tensor delta({1}, {0.3f});
  EXPECT_NEAR(linear_estimate(0.125, grad, delta), 0.275, 1e-7);
}

TEST(SeedScorer, ZeroDeltaReproducesForwardScores) {
  Rng rng = make_rng(21);
  Network net = testutil::small_net(2, rng);
  Tensor x = testutil::random_input(net.input_shape(), rng, 0.0f, 1.0f);
  SeedScorer scorer(net, x, 1);
  Tensor zero(net.input_shape());
  EXPECT_DOUBLE_EQ(scorer.backward_loss(zero), forward_loss(scorer.seed_logits(), 1));
  EXPECT_DOUBLE_EQ(scorer.backward_margin(zero), forward_margin(scorer.seed_logits(), 1));
}

TEST(SeedScorer, ExactOnLinearNetwork) {
  // Margins of a purely linear network are linear, so the backward estimate
  // is exact for any delta.
  Tensor w({3, 4}, {0.2f, -0.5f, 0.3f, 0.1f, -0.4f, 0.6f, -0.2f, 0.5f, 0.7f, 0.1f, -0.3f, -0.6f});
  Network net({4}, {Layer{Dense{w, Tensor({3}, {0.1f, -0.2f, 0.3f})}}});
  Tensor x({4}, {0.5f, 0.25f, -0.75f, 1.0f});
  Tensor delta({4}, {0.05f, -0.1f, 0.2f, -0.15f});
  SeedScorer scorer(net, x, 0);
  Tensor moved = add(x, delta);
  EXPECT_NEAR(scorer.backward_margin(delta), forward_margin(net.forward(moved), 0), 1e-5);
}

TEST(SeedScorer, MixedDispatchesOnRealizedNorm) {
  Rng rng = make_rng(77);
  Network net = testutil::small_net(1, rng);
  Tensor x = testutil::random_input(net.input_shape(), rng, 0.0f, 1.0f);
  const float eps2 = 0.32f;
  SeedScorer scorer(net, x, 0);

  // small step: linear estimate branch
  Tensor small = x;
  small[0] += 0.1f;
  EXPECT_DOUBLE_EQ(scorer.mixed_margin(small, eps2), scorer.backward_margin(sub(small, x)));
  EXPECT_DOUBLE_EQ(scorer.mixed_loss(small, eps2), scorer.backward_loss(sub(small, x)));

  // boundary: the linear branch still owns ||delta|| == eps
  Tensor edge = x;
  edge[0] += eps2;
  ASSERT_LE(l2_norm(sub(edge, x)), double(eps2));
  EXPECT_DOUBLE_EQ(scorer.mixed_margin(edge, eps2), scorer.backward_margin(sub(edge, x)));

  // large step: executed forward
  Tensor big = x;
  for (int i = 0; i < 10; ++i) big[i] += 0.5f;
  EXPECT_DOUBLE_EQ(scorer.mixed_margin(big, eps2), forward_margin(net.forward(big), 0));
  EXPECT_DOUBLE_EQ(scorer.mixed_loss(big, eps2), forward_loss(net.forward(big), 0));
}

TEST(SeedScorer, AnalyticBestBeatsSampledDeltas) {
  Rng rng = make_rng(123);
  Network net = testutil::small_net(2, rng);
  Tensor x = testutil::random_input(net.input_shape(), rng, 0.0f, 1.0f);
  SeedScorer scorer(net, x, 0);
  for (Norm norm : {Norm::l2, Norm::linf}) {
    for (bool loss_head : {true, false}) {
      Transformation best = scorer.analytic_best_sd(norm, 0.1f, loss_head);
      ASSERT_FALSE(best.degenerate);
      const double best_score =
          loss_head ? scorer.backward_loss(best.delta) : scorer.backward_margin(best.delta);
      for (int s = 0; s < 200; ++s) {
        Transformation cand = sample_sd(rng, norm, 0.1f, net.input_shape());
        const double score =
            loss_head ? scorer.backward_loss(cand.delta) : scorer.backward_margin(cand.delta);
        EXPECT_LE(score, best_score + 1e-7);
      }
    }
  }
}

TEST(SeedScorer, DegenerateGradientFlagged) {
  // All-zero weights: every margin gradient vanishes.
  Network net({4}, {Layer{make_dense(3, 4)}});
  SeedScorer scorer(net, Tensor({4}, {1, 2, 3, 4}), 0);
  Transformation t = scorer.analytic_best_sd(Norm::l2, 0.3f, false);
  EXPECT_TRUE(t.degenerate);
  EXPECT_DOUBLE_EQ(l2_norm(t.delta), 0.0);
}

// Budget shape behind the cost model: scoring N deltas under the loss head
// consumes exactly 1 forward + 1 backward, margin head 1 forward + (l-1)
// backwards, and the forward metric N forwards.
TEST(SeedScorer, PassBudget) {
  Rng rng = make_rng(5);
  Network net = testutil::small_net(0, rng);
  Tensor x = testutil::random_input(net.input_shape(), rng);
  std::vector<Transformation> deltas;
  for (int i = 0; i < 50; ++i) deltas.push_back(sample_sd(rng, Norm::l2, 0.3f, net.input_shape()));

  reset_pass_counts();
  {
    SeedScorer scorer(net, x, 0);
    for (const auto& d : deltas) scorer.backward_loss(d.delta);
  }
  EXPECT_EQ(pass_counts().forward, 1u);
  EXPECT_EQ(pass_counts().backward, 1u);

  reset_pass_counts();
  {
    SeedScorer scorer(net, x, 0);
    for (const auto& d : deltas) scorer.backward_margin(d.delta);
  }
  EXPECT_EQ(pass_counts().forward, 1u);
  EXPECT_EQ(pass_counts().backward, std::uint64_t(net.num_classes() - 1));

  reset_pass_counts();
  for (const auto& d : deltas) forward_loss(net.forward(apply(d, x)), 0);
  EXPECT_EQ(pass_counts().forward, deltas.size());
  EXPECT_EQ(pass_counts().backward, 0u);
}

TEST(MetricNames, RoundTripAndErrors) {
  for (MetricKind m : all_metrics()) EXPECT_EQ(parse_metric(to_string(m)), m);
  EXPECT_EQ(to_string(MetricKind::BDF), std::string("BDF"));
  try {
    parse_metric("QQ");
    FAIL() << "expected config_error";
  } catch (const config_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("FM,FL,BM,BL,MM,ML,NC,BD,BDF"), std::string::npos);
  }
}

TEST(NeuronCoverage, HandComputedSections) {
  Network net = identity_net(3);
  std::vector<Tensor> profile_set = {Tensor({3}, {0, 0, 0}), Tensor({3}, {1, 2, 4})};
  NcProfile p = build_nc_profile(net, profile_set, 0, 2);
  EXPECT_FLOAT_EQ(p.lo[1], 0.0f);
  EXPECT_FLOAT_EQ(p.hi[2], 4.0f);

  // interior bins
  EXPECT_EQ(nc_section(p, 0, 0.2f), 1);
  EXPECT_EQ(nc_section(p, 1, 1.0f), 2);
  EXPECT_EQ(nc_section(p, 2, 4.0f), 2);  // top edge belongs to the top bin
  // corner regions
  EXPECT_EQ(nc_section(p, 0, 1.2f), 3);
  EXPECT_EQ(nc_section(p, 1, -0.1f), 0);

  const double score = nc_score(p, net, Tensor({3}, {0.2f, 1.0f, 2.0f}),
                                Tensor({3}, {1.2f, -0.1f, 2.0f}));
  EXPECT_NEAR(score, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(nc_score(p, net, Tensor({3}, {0.2f, 1.0f, 2.0f}),
                            Tensor({3}, {0.2f, 1.0f, 2.0f})),
                   0.0);
}

TEST(NeuronCoverage, DegenerateRangeSingleSection) {
  Network net = identity_net(2);
  std::vector<Tensor> profile_set = {Tensor({2}, {0.5f, 0}), Tensor({2}, {0.5f, 1})};
  NcProfile p = build_nc_profile(net, profile_set, 0, 4);
  EXPECT_EQ(nc_section(p, 0, 0.5f), 1);
  EXPECT_EQ(nc_section(p, 0, 0.6f), 5);  // above the collapsed range
  EXPECT_EQ(nc_section(p, 0, 0.4f), 0);
}

TEST(Divergence, UnitNormalizedDistance) {
  Network net = identity_net(2);
  // orthogonal directions -> sqrt(2), regardless of magnitude
  EXPECT_NEAR(bd_divergence(net, Tensor({2}, {1, 0}), Tensor({2}, {0, 5}), 0), std::sqrt(2.0),
              1e-7);
  // same direction -> 0
  EXPECT_NEAR(bd_divergence(net, Tensor({2}, {1, 1}), Tensor({2}, {3, 3}), 0), 0.0, 1e-7);
  // zero vector compared as-is
  EXPECT_NEAR(bd_divergence(net, Tensor({2}, {0, 0}), Tensor({2}, {0, 2}), 0), 1.0, 1e-7);
}

TEST(Divergence, LayerSelection) {
  Rng rng = make_rng(9);
  Network net = testutil::small_net(2, rng);  // depth 5
  EXPECT_EQ(bd_layer(net, false), 2);
  EXPECT_EQ(bd_layer(net, true), 4);
  EXPECT_EQ(middle_layer(net), 2);
}
