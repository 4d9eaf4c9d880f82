#include "dirnn/network.hpp"

#include <gtest/gtest.h>

#include "dirnn/rng.hpp"

using namespace dirnn;

namespace {

Network two_class_dense(Tensor w, Tensor b) {
  Dense d{std::move(w), std::move(b)};
  return Network({2}, {Layer{std::move(d)}});
}

}  // namespace

TEST(Layers, DenseIdentity) {
  Network net = two_class_dense(Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2}));
  Tensor out = net.forward(Tensor({2}, {1, 2}));
  EXPECT_FLOAT_EQ(out[0], 1.0f);
  EXPECT_FLOAT_EQ(out[1], 2.0f);
}

TEST(Layers, DenseAffine) {
  // W=[[1,0],[0,2]], b=[1,-1], x=[1,1] -> [2,1]
  Network net = two_class_dense(Tensor({2, 2}, {1, 0, 0, 2}), Tensor({2}, {1, -1}));
  Tensor out = net.forward(Tensor({2}, {1, 1}));
  EXPECT_FLOAT_EQ(out[0], 2.0f);
  EXPECT_FLOAT_EQ(out[1], 1.0f);
}

TEST(Layers, ReluClampsNegatives) {
  Tensor in({2}, {-1, 2});
  Tensor out({2});
  detail::relu_forward(in, out);
  EXPECT_FLOAT_EQ(out[0], 0.0f);
  EXPECT_FLOAT_EQ(out[1], 2.0f);
}

TEST(Layers, ConvHandComputed) {
  // 1x1x3x3 input, single 2x2 kernel of ones, bias 0.5: each output cell is
  // the window sum plus bias.
  Conv2d c = make_conv2d(1, 1, 2, 2);
  c.kernel.fill(1.0f);
  c.bias[0] = 0.5f;
  Tensor in({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor out({1, 2, 2});
  detail::conv2d_forward(c, in, out);
  EXPECT_FLOAT_EQ(out.at3(0, 0, 0), 12.5f);
  EXPECT_FLOAT_EQ(out.at3(0, 0, 1), 16.5f);
  EXPECT_FLOAT_EQ(out.at3(0, 1, 0), 24.5f);
  EXPECT_FLOAT_EQ(out.at3(0, 1, 1), 28.5f);
}

TEST(Layers, ConvZeroPadding) {
  // Same kernel with pad=1: the corner output sees a single input cell.
  Conv2d c = make_conv2d(1, 1, 3, 3, 1, 1);
  c.kernel.fill(1.0f);
  Tensor in({1, 2, 2}, {1, 2, 3, 4});
  Tensor out({1, 2, 2});
  detail::conv2d_forward(c, in, out);
  EXPECT_FLOAT_EQ(out.at3(0, 0, 0), 10.0f);  // whole image in view
  EXPECT_FLOAT_EQ(out.at3(0, 1, 1), 10.0f);
}

TEST(Layers, Pooling) {
  Tensor in({1, 2, 2}, {1, 2, 3, 4});
  Tensor out({1, 1, 1});
  detail::avgpool_forward(2, in, out);
  EXPECT_FLOAT_EQ(out[0], 2.5f);
  detail::maxpool_forward(2, in, out);
  EXPECT_FLOAT_EQ(out[0], 4.0f);
}

TEST(Layers, ShapeAlgebraRejectsMismatch) {
  EXPECT_THROW(output_shape(Layer{make_dense(3, 4)}, {5}), dimension_error);
  EXPECT_THROW(output_shape(Layer{make_conv2d(4, 2, 5, 5)}, {1, 28, 28}), dimension_error);
  EXPECT_THROW(output_shape(Layer{MaxPool{2}}, {1, 5, 5}), dimension_error);
  EXPECT_EQ(output_shape(Layer{Flatten{}}, {4, 4, 4}), (std::vector<int>{64}));
}

TEST(Network, LeNetShapeChain) {
  std::vector<Layer> layers;
  layers.push_back(make_conv2d(4, 1, 5, 5));
  layers.push_back(Relu{});
  layers.push_back(MaxPool{2});
  layers.push_back(make_conv2d(12, 4, 5, 5));
  layers.push_back(Relu{});
  layers.push_back(MaxPool{2});
  layers.push_back(Flatten{});
  layers.push_back(make_dense(10, 192));
  Network net({1, 28, 28}, std::move(layers));
  EXPECT_EQ(net.layer_shape(0), (std::vector<int>{4, 24, 24}));
  EXPECT_EQ(net.layer_shape(2), (std::vector<int>{4, 12, 12}));
  EXPECT_EQ(net.layer_shape(5), (std::vector<int>{12, 4, 4}));
  EXPECT_EQ(net.layer_shape(6), (std::vector<int>{192}));
  EXPECT_EQ(net.num_classes(), 10);
  EXPECT_EQ(net.param_count(), 3246u);
}

TEST(Network, ClassifyTieBreaksLow) {
  // Equal logits resolve to class 0.
  Network net = two_class_dense(Tensor({2, 2}, {1, 0, 1, 0}), Tensor({2}));
  EXPECT_EQ(net.classify(Tensor({2}, {3, 7})), 0);
}

TEST(Network, ForwardIsPure) {
  Rng rng = make_rng(11);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<Layer> layers{make_dense(8, 4), Relu{}, make_dense(3, 8)};
  for (Layer& l : layers)
    std::visit(
        [&](auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Dense>) {
            for (std::size_t i = 0; i < v.weight.size(); ++i) v.weight[i] = u(rng);
            for (std::size_t i = 0; i < v.bias.size(); ++i) v.bias[i] = u(rng);
          }
        },
        l);
  Network net({4}, std::move(layers));
  Tensor x({4}, {0.1f, -0.2f, 0.3f, -0.4f});
  Tensor a = net.forward(x);
  Tensor b = net.forward(x);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);  // bitwise
}

TEST(Network, ForwardAllMatchesPieces) {
  std::vector<Layer> layers{make_conv2d(2, 1, 3, 3), Relu{}, Flatten{}, make_dense(3, 2 * 6 * 6)};
  Rng rng = make_rng(5);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  for (Layer& l : layers)
    std::visit(
        [&](auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Dense>) {
            for (std::size_t i = 0; i < v.weight.size(); ++i) v.weight[i] = u(rng);
          } else if constexpr (std::is_same_v<T, Conv2d>) {
            for (std::size_t i = 0; i < v.kernel.size(); ++i) v.kernel[i] = u(rng);
          }
        },
        l);
  Network net({1, 8, 8}, std::move(layers));
  Tensor x({1, 8, 8});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(rng);

  auto outs = net.forward_all(x);
  ASSERT_EQ(outs.size(), 4u);
  Tensor logits = net.forward(x);
  for (std::size_t i = 0; i < logits.size(); ++i) EXPECT_EQ(outs.back()[i], logits[i]);
  Tensor mid = net.activations_at(x, 1);
  for (std::size_t i = 0; i < mid.size(); ++i) EXPECT_EQ(outs[1][i], mid[i]);
}

TEST(Network, PassCounters) {
  Network net = two_class_dense(Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2}));
  Tensor x({2}, {1, 2});
  reset_pass_counts();
  net.forward(x);
  net.forward_all(x);
  net.activations_at(x, 0);
  net.classify(x);
  EXPECT_EQ(pass_counts().forward, 4u);
  EXPECT_EQ(pass_counts().backward, 0u);
}

TEST(Network, RejectsWrongInputShape) {
  Network net = two_class_dense(Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2}));
  EXPECT_THROW(net.forward(Tensor({3})), dimension_error);
}
