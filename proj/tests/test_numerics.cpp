// Copyright 2026 The camgate Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "camgate/error.hpp"
#include "camgate/numerics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

namespace camgate
{
namespace
{

using fixtures::random_tensor;

TEST(Conv2d, SingleElement)
{
  const Tensor out = conv2d_forward(Tensor({1, 1, 1}, {3.0}), Tensor({1, 1, 1, 1}, {2.0}), Tensor({1}, {0.5}), 1, 0);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(out[0], 6.5);
}

TEST(Conv2d, SumOfOnes)
{
  const Tensor out = conv2d_forward(Tensor({1, 3, 3}, 1.0), Tensor({1, 1, 3, 3}, 1.0), Tensor({1}, 0.0), 1, 0);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(out[0], 9.0);
}

TEST(Conv2d, MatchesLoopOracle)
{
  std::mt19937_64 rng(11);
  const Tensor in = random_tensor(rng, {2, 5, 5});
  const Tensor w = random_tensor(rng, {3, 2, 3, 3});
  const Tensor b = random_tensor(rng, {3});
  const Tensor out = conv2d_forward(in, w, b, 2, 1);
  const Tensor ref = oracle::conv2d(in, w, b, 2, 1);
  ASSERT_EQ(out.shape(), (Shape{3, 3, 3}));
  EXPECT_EQ(out, ref);
}

TEST(Conv2d, ShapeErrors)
{
  try {
    conv2d_forward(Tensor({2, 4, 4}), Tensor({1, 3, 3, 3}), Tensor({1}), 1, 0);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos) << e.what();
  }
  EXPECT_THROW(conv2d_forward(Tensor({1, 4, 4}), Tensor({1, 1, 3, 3}), Tensor({1}), 2, 0), Error);
}

TEST(Relu, Cases)
{
  EXPECT_EQ(relu_forward(Tensor({3}, {-1.0, 0.0, 2.0})).values(), (std::vector<double>{0.0, 0.0, 2.0}));
  EXPECT_EQ(relu_forward(Tensor({2, 2}, -3.0)), Tensor({2, 2}, 0.0));
  std::mt19937_64 rng(3);
  const Tensor t = random_tensor(rng, {4, 5});
  const Tensor r = relu_forward(t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(r[i], t[i] > 0.0 ? t[i] : 0.0);
  }
}

TEST(MaxPool, ConstantAndSmall)
{
  const MaxPoolResult c = maxpool_forward(Tensor({2, 4, 4}, 1.5), 2, 2);
  EXPECT_EQ(c.output, Tensor({2, 2, 2}, 1.5));
  const MaxPoolResult r = maxpool_forward(Tensor({1, 2, 2}, {1, 2, 3, 4}), 2, 2);
  EXPECT_EQ(r.output.values(), (std::vector<double>{4.0}));
  EXPECT_EQ(r.argmax, (std::vector<std::size_t>{3}));
}

TEST(MaxPool, TieGoesToFirstRowMajor)
{
  const MaxPoolResult r = maxpool_forward(Tensor({1, 2, 2}, {0, 5, 5, 5}), 2, 2);
  EXPECT_EQ(r.argmax, (std::vector<std::size_t>{1}));
}

TEST(MaxPool, MatchesLoopOracle)
{
  std::mt19937_64 rng(5);
  const Tensor in = random_tensor(rng, {3, 6, 6});
  const MaxPoolResult got = maxpool_forward(in, 2, 2);
  const MaxPoolResult ref = oracle::maxpool(in, 2, 2);
  EXPECT_EQ(got.output, ref.output);
  EXPECT_EQ(got.argmax, ref.argmax);
  EXPECT_THROW(maxpool_forward(Tensor({1, 5, 5}), 2, 2), Error);
}

TEST(MaxPool, BackwardConservesMass)
{
  std::mt19937_64 rng(8);
  const Tensor in = random_tensor(rng, {2, 6, 6});
  const MaxPoolResult fwd = maxpool_forward(in, 3, 1);
  const Tensor g = random_tensor(rng, fwd.output.shape());
  const Tensor back = maxpool_backward(g, fwd.argmax, in.shape());
  const double sum_in = std::accumulate(g.values().begin(), g.values().end(), 0.0);
  const double sum_out = std::accumulate(back.values().begin(), back.values().end(), 0.0);
  EXPECT_NEAR(sum_in, sum_out, 1e-12);
  for (std::size_t i = 0; i < back.size(); ++i) {
    if (back[i] != 0.0) {
      EXPECT_NE(std::find(fwd.argmax.begin(), fwd.argmax.end(), i), fwd.argmax.end());
    }
  }
}

TEST(Dense, IdentityZeroAndOracle)
{
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) {
    eye.at(i, i) = 1.0;
  }
  const Tensor x({3}, {0.5, -2.0, 7.0});
  EXPECT_EQ(dense_forward(x, eye, Tensor({3})), x);
  const Tensor b({2}, {1.0, -1.0});
  EXPECT_EQ(dense_forward(x, Tensor({2, 3}), b), b);

  std::mt19937_64 rng(9);
  const Tensor in = random_tensor(rng, {7});
  const Tensor w = random_tensor(rng, {4, 7});
  const Tensor bias = random_tensor(rng, {4});
  EXPECT_EQ(dense_forward(in, w, bias), oracle::dense(in, w, bias));
  EXPECT_THROW(dense_forward(Tensor({6}), w, bias), Error);
}

TEST(Softmax, Examples)
{
  EXPECT_EQ(softmax(Tensor({4}, 0.0)).values(), (std::vector<double>(4, 0.25)));
  const Tensor big = softmax(Tensor({2}, {1000.0, 0.0}));
  EXPECT_TRUE(std::isfinite(big[0]) && std::isfinite(big[1]));
  EXPECT_NEAR(big[0], 1.0, 1e-15);
  EXPECT_LT(big[1], 1e-300);
}

TEST(Softmax, ExtendedPrecisionOracle)
{
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor logits = random_tensor(rng, {6}, -8.0, 8.0);
    const Tensor p = softmax(logits);
    const auto ref = oracle::softmax(logits);
    double total = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
      EXPECT_NEAR(p[k], static_cast<double>(ref[k]), 1e-12);
      EXPECT_GT(p[k], 0.0);
      EXPECT_LE(p[k], 1.0);
      total += p[k];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Backward, FlattenIdentityIsOneHot)
{
  Tensor eye({4, 4});
  for (std::size_t i = 0; i < 4; ++i) {
    eye.at(i, i) = 1.0;
  }
  const std::vector<Layer> tail = {FlattenLayer{}, DenseLayer{eye, Tensor({4})}};
  const Tensor a({1, 2, 2}, {0.3, -1.0, 2.0, 0.0});
  const ForwardTrace t = forward_trace(tail, a);
  for (std::size_t c = 0; c < 4; ++c) {
    const Tensor g = backward_to_layer(tail, t.layers, c);
    ASSERT_EQ(g.shape(), a.shape());
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(g[i], i == c ? 1.0 : 0.0);
    }
  }
}

TEST(Backward, ReluMask)
{
  const std::vector<Layer> tail = {ReluLayer{}};
  const Tensor a({5}, {-1.0, 0.0, 0.5, 3.0, -0.2});
  const ForwardTrace t = forward_trace(tail, a);
  const Tensor g = backward_to_layer(tail, t.layers, Tensor({5}, 1.0));
  EXPECT_EQ(g.values(), (std::vector<double>{0, 0, 1, 1, 0}));
}

TEST(Backward, Errors)
{
  std::mt19937_64 rng(1);
  const std::vector<Layer> tail = {FlattenLayer{}, DenseLayer{random_tensor(rng, {3, 4}), Tensor({3})}};
  const Tensor a = random_tensor(rng, {1, 2, 2});
  const ForwardTrace t = forward_trace(tail, a);
  try {
    backward_to_layer(tail, t.layers, std::size_t{3});
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::Input);
  }
  try {
    backward_to_layer(tail, std::span<const LayerTrace>(t.layers).first(1), std::size_t{0});
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::Usage);
  }
}

TEST(Backward, SmallNetMatchesFiniteDifferences)
{
  std::mt19937_64 rng(2024);
  int checked = 0;
  while (checked < 5) {
    const std::vector<Layer> tail = {
      Conv2dLayer{random_tensor(rng, {2, 1, 3, 3}), random_tensor(rng, {2}, 0.2, 1.0), 1, 1}, ReluLayer{},
      MaxPoolLayer{2, 2}, FlattenLayer{}, DenseLayer{random_tensor(rng, {3, 32}), random_tensor(rng, {3})},
      SoftmaxLayer{}};
    const Tensor a = random_tensor(rng, {1, 8, 8});
    if (!oracle::smooth_at(tail, a, 1e-3)) {
      continue;
    }
    const ForwardTrace t = forward_trace(tail, a);
    for (std::size_t c = 0; c < 3; ++c) {
      Tensor seed({3});
      seed[c] = 1.0;
      const Tensor g = backward_to_layer(tail, t.layers, c);
      EXPECT_LT(oracle::max_relative_error(g, oracle::finite_difference(tail, a, seed)), 1e-6);
    }
    ++checked;
  }
}

TEST(Backward, Linearity)
{
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const fixtures::RandomNetwork net = fixtures::random_network(rng, 2);
    const ForwardTrace t = forward_trace(net.layers, net.input);
    const double a = fixtures::uniform(rng, -2, 2);
    const double b = fixtures::uniform(rng, -2, 2);
    Tensor seed({net.classes});
    seed[0] = a;
    seed[1] = b;
    const Tensor combined = backward_to_layer(net.layers, t.layers, seed);
    const Tensor g0 = backward_to_layer(net.layers, t.layers, std::size_t{0});
    const Tensor g1 = backward_to_layer(net.layers, t.layers, std::size_t{1});
    for (std::size_t i = 0; i < combined.size(); ++i) {
      EXPECT_NEAR(combined[i], a * g0[i] + b * g1[i], 1e-12 * (1.0 + std::abs(combined[i])));
    }
  }
}

TEST(Backward, ConvToInputMatchesFiniteDifferences)
{
  std::mt19937_64 rng(31);
  const Conv2dLayer conv{random_tensor(rng, {3, 2, 3, 3}), random_tensor(rng, {3}), 2, 1};
  const std::vector<Layer> tail = {conv, FlattenLayer{}, DenseLayer{random_tensor(rng, {2, 27}), Tensor({2})}};
  const Tensor a = random_tensor(rng, {2, 5, 5});
  const ForwardTrace t = forward_trace(tail, a);
  const Tensor g = backward_to_layer(tail, t.layers, std::size_t{1});
  EXPECT_LT(oracle::max_relative_error(g, oracle::finite_difference(tail, a, Tensor({2}, {0.0, 1.0}))), 1e-6);
}

TEST(Shapes, SymbolicMatchesRuntime)
{
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const fixtures::RandomNetwork net = fixtures::random_network(rng, 3);
    Shape shape = net.input.shape();
    Tensor value = net.input;
    for (const Layer & layer : net.layers) {
      shape = output_shape(layer, shape);
      value = apply_layer(layer, value);
      EXPECT_EQ(shape, value.shape());
      for (double v : value.values()) {
        EXPECT_TRUE(std::isfinite(v));
      }
    }
  }
}

TEST(Determinism, RepeatedTraceIsIdentical)
{
  std::mt19937_64 rng(51);
  const fixtures::RandomNetwork net = fixtures::random_network(rng, 2);
  EXPECT_EQ(forward_trace(net.layers, net.input), forward_trace(net.layers, net.input));
}

}  // namespace
}  // namespace camgate
