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

#pragma once

// Forward and backward kernels for a sequential CNN in 64-bit arithmetic.
//
// Convolution is cross-correlation (no kernel flip). Max pooling ties go to the
// first maximal element in row-major window order. Backward passes compute the
// gradient of a pre-softmax logit with respect to an intermediate activation;
// parameter gradients are not needed and not provided.

#include "camgate/tensor.hpp"

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace camgate
{

struct Conv2dLayer
{
  Tensor weights;  // [C_out, C_in, kH, kW]
  Tensor bias;     // [C_out]
  std::size_t stride = 1;
  std::size_t padding = 0;
};

struct ReluLayer
{
};

struct MaxPoolLayer
{
  std::size_t kernel = 2;
  std::size_t stride = 2;
};

struct FlattenLayer
{
};

struct DenseLayer
{
  Tensor weights;  // [M, N]
  Tensor bias;     // [M]
};

struct SoftmaxLayer
{
};

using Layer = std::variant<Conv2dLayer, ReluLayer, MaxPoolLayer, FlattenLayer, DenseLayer, SoftmaxLayer>;

struct MaxPoolResult
{
  Tensor output;
  /// Flat input index of the selected element, one per output cell.
  std::vector<std::size_t> argmax;
};

Tensor conv2d_forward(
  const Tensor & input, const Tensor & weights, const Tensor & bias, std::size_t stride,
  std::size_t padding);

/// Gradient w.r.t. the convolution input, given the gradient w.r.t. its output.
Tensor conv2d_backward_input(
  const Tensor & grad_output, const Tensor & weights, const Shape & input_shape,
  std::size_t stride, std::size_t padding);

Tensor relu_forward(const Tensor & input);
Tensor relu_backward(const Tensor & grad_output, const Tensor & input);

MaxPoolResult maxpool_forward(const Tensor & input, std::size_t kernel, std::size_t stride);
Tensor maxpool_backward(
  const Tensor & grad_output, std::span<const std::size_t> argmax, const Shape & input_shape);

Tensor dense_forward(const Tensor & input, const Tensor & weights, const Tensor & bias);
Tensor dense_backward_input(const Tensor & grad_output, const Tensor & weights);

Tensor softmax(const Tensor & logits);

/// Output shape of a layer for a given input shape; throws a configuration
/// error when the layer cannot accept that shape.
Shape output_shape(const Layer & layer, const Shape & input_shape);

/// Per-layer state recorded by the forward pass and consumed by backward.
struct LayerTrace
{
  Tensor input;
  Shape output_shape;
  std::vector<std::size_t> argmax;  // max pooling only

  bool operator==(const LayerTrace &) const = default;
};

struct ForwardTrace
{
  std::vector<LayerTrace> layers;
  Tensor output;

  bool operator==(const ForwardTrace &) const = default;
};

Tensor apply_layer(const Layer & layer, const Tensor & input, std::vector<std::size_t> * argmax = nullptr);

ForwardTrace forward_trace(std::span<const Layer> layers, const Tensor & input);

/// Runs the layers without recording, returning the final output.
Tensor forward_plain(std::span<const Layer> layers, const Tensor & input);

/// Number of logits produced by `tail`, i.e. the width before any final softmax.
std::size_t logit_count(std::span<const Layer> tail, std::span<const LayerTrace> cache);

/// Backpropagates `seed` (a gradient w.r.t. the pre-softmax logits) through
/// `tail` to the input of its first layer. A trailing softmax is skipped.
Tensor backward_to_layer(
  std::span<const Layer> tail, std::span<const LayerTrace> cache, const Tensor & seed);

/// Gradient of logit `seed_class` w.r.t. the input of the first layer of `tail`.
Tensor backward_to_layer(
  std::span<const Layer> tail, std::span<const LayerTrace> cache, std::size_t seed_class);

}  // namespace camgate
