#include "dirnn/transforms.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dirnn;

TEST(Projection, L2MatchesHandValues) {
  Tensor h({2}, {3, 4});
  Transformation t = project_l2(h, 1.0f);
  EXPECT_NEAR(t.delta[0], 0.6, 1e-7);
  EXPECT_NEAR(t.delta[1], 0.8, 1e-7);
  EXPECT_NEAR(l2_norm(t.delta), 1.0, 1e-6);
  EXPECT_NEAR(dot(h, t.delta), projection_gain(h, Norm::l2, 1.0f), 1e-6);
  EXPECT_FALSE(t.degenerate);
}

TEST(Projection, LinfMatchesHandValues) {
  Tensor h({3}, {0.5f, -2.0f, 0.0f});
  Transformation t = project_linf(h, 0.1f);
  EXPECT_FLOAT_EQ(t.delta[0], 0.1f);
  EXPECT_FLOAT_EQ(t.delta[1], -0.1f);
  EXPECT_FLOAT_EQ(t.delta[2], 0.0f);
  EXPECT_NEAR(dot(h, t.delta), 0.1 * l1_norm(h), 1e-7);
}

TEST(Projection, ZeroGradientIsDegenerate) {
  Tensor h({4});
  EXPECT_TRUE(project_l2(h, 0.3f).degenerate);
  EXPECT_TRUE(project_linf(h, 0.3f).degenerate);
  EXPECT_DOUBLE_EQ(l2_norm(project_l2(h, 0.3f).delta), 0.0);
}

// First-order optimality: no sampled in-ball delta beats the projection.
// The acceptance suite runs the full-scale version of this check.
TEST(Projection, BeatsSampledDeltas) {
  Rng rng = make_rng(515);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int dim = 16;
  for (int rep = 0; rep < 10; ++rep) {
    Tensor h({dim});
    for (int i = 0; i < dim; ++i) h[i] = float(gauss(rng));
    for (Norm norm : {Norm::l2, Norm::linf}) {
      const float eps = 0.25f;
      const double best = projection_gain(h, norm, eps);
      const Transformation proj = project(h, norm, eps);
      EXPECT_NEAR(dot(h, proj.delta), best, 1e-6 * std::abs(best));
      for (int s = 0; s < 2000; ++s) {
        Tensor d({dim});
        if (norm == Norm::linf) {
          for (int i = 0; i < dim; ++i) d[i] = float(eps * u(rng));
        } else {
          double n2 = 0.0;
          for (int i = 0; i < dim; ++i) {
            d[i] = float(gauss(rng));
            n2 += double(d[i]) * d[i];
          }
          const double r = eps * std::pow(std::uniform_real_distribution<double>(0, 1)(rng),
                                          1.0 / dim) /
                           std::sqrt(n2);
          for (int i = 0; i < dim; ++i) d[i] = float(d[i] * r);
        }
        EXPECT_LE(dot(h, d), best + 1e-7);
      }
    }
  }
}

TEST(SdSampling, LinfEnvelope) {
  Rng rng = make_rng(99);
  const float eps = 0.06f;
  Transformation t = sample_sd(rng, Norm::linf, eps, {1, 4, 4});
  for (std::size_t i = 0; i < t.delta.size(); ++i) {
    EXPECT_LE(std::abs(t.delta[i]), eps + 1e-7f);
    EXPECT_GE(std::abs(t.delta[i]), eps * 0.5f - 1e-7f);
  }
}

TEST(SdSampling, L2OnSphere) {
  Rng rng = make_rng(100);
  Transformation t = sample_sd(rng, Norm::l2, 0.32f, {1, 5, 5});
  EXPECT_NEAR(l2_norm(t.delta), 0.32, 1e-5);
}

TEST(SdSampling, Deterministic) {
  Rng a = make_rng(7), b = make_rng(7);
  Transformation ta = sample_sd(a, Norm::linf, 0.06f, {8});
  Transformation tb = sample_sd(b, Norm::linf, 0.06f, {8});
  for (std::size_t i = 0; i < ta.delta.size(); ++i) EXPECT_EQ(ta.delta[i], tb.delta[i]);
}

TEST(Natural, IdentityParametersLeaveImageUntouched) {
  Tensor img({1, 5, 5});
  Rng rng = make_rng(4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = u(rng);

  for (const Transformation& t :
       {make_natural(NaturalKind::shift, 0, 0), make_natural(NaturalKind::zoom, 1.0),
        make_natural(NaturalKind::rotation, 0.0), make_natural(NaturalKind::shearing, 0, 0),
        make_natural(NaturalKind::brightness, 0.0), make_natural(NaturalKind::contrast, 1.0)}) {
    Tensor out = apply(t, img);
    for (std::size_t i = 0; i < img.size(); ++i)
      EXPECT_EQ(out[i], img[i]) << t.describe() << " idx " << i;
  }
}

TEST(Natural, IntegerShiftMovesPixels) {
  Tensor img({1, 3, 3});
  img.at3(0, 1, 1) = 1.0f;
  Tensor out = apply(make_natural(NaturalKind::shift, 1.0, 0.0), img);  // right by 1
  EXPECT_FLOAT_EQ(out.at3(0, 1, 2), 1.0f);
  EXPECT_FLOAT_EQ(out.at3(0, 1, 1), 0.0f);
  // content shifted out of frame is replaced by zero padding
  Tensor out2 = apply(make_natural(NaturalKind::shift, -1.0, 0.0), out);
  EXPECT_FLOAT_EQ(out2.at3(0, 1, 1), 1.0f);
  EXPECT_FLOAT_EQ(out2.at3(0, 1, 0), 0.0f);
}

TEST(Natural, Rotation180) {
  Tensor img({1, 3, 3});
  img.at3(0, 0, 1) = 1.0f;
  Tensor out = apply(make_natural(NaturalKind::rotation, 180.0), img);
  EXPECT_NEAR(out.at3(0, 2, 1), 1.0f, 1e-6);
  EXPECT_NEAR(out.at3(0, 0, 1), 0.0f, 1e-6);
}

TEST(Natural, SmallRotationStaysClose) {
  Tensor img({1, 7, 7});
  for (int r = 2; r <= 4; ++r)
    for (int c = 2; c <= 4; ++c) img.at3(0, r, c) = 0.8f;
  Tensor out = apply(make_natural(NaturalKind::rotation, 3.0), img);
  EXPECT_LT(max_abs_diff(img, out), 0.25);
  EXPECT_GT(max_abs_diff(img, out), 0.0);
}

TEST(Natural, ZoomInKeepsConstantImageConstant) {
  Tensor img({1, 6, 6});
  img.fill(0.42f);
  Tensor out = apply(make_natural(NaturalKind::zoom, 1.25), img);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], 0.42f, 1e-6);
}

TEST(Natural, BrightnessAndContrast) {
  Tensor img({1, 1, 2}, {0.5f, 0.9f});
  Tensor b = apply(make_natural(NaturalKind::brightness, 0.2), img);
  EXPECT_FLOAT_EQ(b[0], 0.7f);
  EXPECT_FLOAT_EQ(b[1], 1.0f);  // clamped

  Tensor img2({1, 1, 2}, {0.75f, 0.25f});
  Tensor c = apply(make_natural(NaturalKind::contrast, 1.5), img2);
  EXPECT_NEAR(c[0], 0.875f, 1e-6);  // 0.5 + 1.5 * 0.25
  EXPECT_NEAR(c[1], 0.125f, 1e-6);
}

// The blur kernel is normalized (including at borders), so a constant image
// is an exact fixed point.
TEST(Natural, BlurFixesConstantImage) {
  Tensor img({1, 8, 8});
  img.fill(0.37f);
  for (double sigma : {0.3, 0.5, 1.2}) {
    Tensor out = apply(make_natural(NaturalKind::blur, sigma), img);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_FLOAT_EQ(out[i], 0.37f);
  }
}

TEST(Natural, BlurSmoothsEdges) {
  Tensor img({1, 6, 6});
  for (int r = 0; r < 6; ++r)
    for (int c = 3; c < 6; ++c) img.at3(0, r, c) = 1.0f;
  Tensor out = apply(make_natural(NaturalKind::blur, 0.5), img);
  EXPECT_GT(out.at3(0, 3, 2), 0.0f);
  EXPECT_LT(out.at3(0, 3, 3), 1.0f);
}

TEST(Natural, SampleSetShapeAndDeterminism) {
  NaturalSpec spec;
  Rng a = make_rng(31), b = make_rng(31);
  auto sa = sample_natural(a, spec);
  auto sb = sample_natural(b, spec);
  ASSERT_EQ(sa.size(), 28u);  // 7 kinds x 4 variants
  for (std::size_t i = 0; i < sa.size(); ++i) {
    EXPECT_EQ(sa[i].kind, sb[i].kind);
    EXPECT_EQ(sa[i].params[0], sb[i].params[0]);
    EXPECT_EQ(sa[i].params[1], sb[i].params[1]);
  }
  // fixed family order, variants contiguous
  EXPECT_EQ(sa[0].kind, NaturalKind::shift);
  EXPECT_EQ(sa[4].kind, NaturalKind::zoom);
  EXPECT_EQ(sa[27].kind, NaturalKind::contrast);
  for (const auto& t : sa) {
    if (t.kind == NaturalKind::rotation) EXPECT_LE(std::abs(t.params[0]), spec.rotation_step);
    if (t.kind == NaturalKind::blur)
      EXPECT_TRUE(float(t.params[0]) == spec.blur_sigma_lo || float(t.params[0]) == spec.blur_sigma_hi);
  }
}

TEST(Transformation, ClampShrinksRealizedDelta) {
  // Seed sits at the lower pixel bound; a negative delta is clamped away.
  Tensor x({4});  // all zeros
  Transformation t;
  t.family = Transformation::Family::sd;
  t.norm = Norm::linf;
  t.epsilon = 0.06f;
  t.delta = Tensor({4}, {-0.06f, -0.06f, 0.05f, 0.06f});
  Tensor out = apply(t, x);
  Tensor realized = sub(out, x);
  EXPECT_FLOAT_EQ(realized[0], 0.0f);
  EXPECT_FLOAT_EQ(realized[2], 0.05f);
  EXPECT_LT(l2_norm(realized), l2_norm(t.delta));
}
