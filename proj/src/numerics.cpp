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

#include "camgate/numerics.hpp"

#include "camgate/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

namespace camgate
{
namespace
{

template <class... Ts>
struct Overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_rank(const Tensor & t, std::size_t rank, const char * what)
{
  if (t.rank() != rank) {
    config_error(
      std::string(what) + " must have rank " + std::to_string(rank) + ", got shape " +
      shape_to_string(t.shape()));
  }
}

// Window output extent: (extent + 2*pad - kernel) / stride + 1, integral and positive.
std::size_t window_extent(
  std::size_t extent, std::size_t kernel, std::size_t stride, std::size_t padding,
  const char * axis)
{
  if (stride == 0 || kernel == 0) {
    config_error(std::string("kernel and stride must be positive along ") + axis);
  }
  const std::size_t padded = extent + 2 * padding;
  if (padded < kernel) {
    config_error(
      std::string("kernel ") + std::to_string(kernel) + " exceeds padded " + axis + " extent " +
      std::to_string(padded));
  }
  if ((padded - kernel) % stride != 0) {
    config_error(
      std::string("non-integral output ") + axis + ": (" + std::to_string(extent) + " + 2*" +
      std::to_string(padding) + " - " + std::to_string(kernel) + ") is not divisible by stride " +
      std::to_string(stride));
  }
  return (padded - kernel) / stride + 1;
}

Shape conv_output_shape(
  const Shape & in, const Shape & w, std::size_t bias_len, std::size_t stride, std::size_t padding)
{
  if (in.size() != 3) {
    config_error("conv2d input must be [C,H,W], got " + shape_to_string(in));
  }
  if (w.size() != 4) {
    config_error("conv2d weights must be [C_out,C_in,kH,kW], got " + shape_to_string(w));
  }
  if (in[0] != w[1]) {
    config_error(
      "conv2d input channels " + std::to_string(in[0]) + " do not match weight C_in " +
      std::to_string(w[1]));
  }
  if (bias_len != w[0]) {
    config_error(
      "conv2d bias length " + std::to_string(bias_len) + " does not match C_out " +
      std::to_string(w[0]));
  }
  return {
    w[0], window_extent(in[1], w[2], stride, padding, "height"),
    window_extent(in[2], w[3], stride, padding, "width")};
}

Shape pool_output_shape(const Shape & in, std::size_t kernel, std::size_t stride)
{
  if (in.size() != 3) {
    config_error("maxpool input must be [C,H,W], got " + shape_to_string(in));
  }
  return {
    in[0], window_extent(in[1], kernel, stride, 0, "height"),
    window_extent(in[2], kernel, stride, 0, "width")};
}

Shape dense_output_shape(const Shape & in, const Shape & w, std::size_t bias_len)
{
  if (in.size() != 1) {
    config_error("dense input must be a vector, got " + shape_to_string(in));
  }
  if (w.size() != 2) {
    config_error("dense weights must be [M,N], got " + shape_to_string(w));
  }
  if (in[0] != w[1]) {
    config_error(
      "dense input length " + std::to_string(in[0]) + " does not match weight N " +
      std::to_string(w[1]));
  }
  if (bias_len != w[0]) {
    config_error(
      "dense bias length " + std::to_string(bias_len) + " does not match M " +
      std::to_string(w[0]));
  }
  return {w[0]};
}

}  // namespace

Tensor conv2d_forward(
  const Tensor & input, const Tensor & weights, const Tensor & bias, std::size_t stride,
  std::size_t padding)
{
  require_rank(bias, 1, "conv2d bias");
  const Shape out_shape = conv_output_shape(input.shape(), weights.shape(), bias.size(), stride, padding);
  const std::size_t c_in = weights.dim(1);
  const std::size_t k_h = weights.dim(2);
  const std::size_t k_w = weights.dim(3);
  const auto in_h = static_cast<std::ptrdiff_t>(input.dim(1));
  const auto in_w = static_cast<std::ptrdiff_t>(input.dim(2));
  const auto pad = static_cast<std::ptrdiff_t>(padding);

  Tensor out(out_shape);
  const auto w = weights.data();
  for (std::size_t o = 0; o < out_shape[0]; ++o) {
    for (std::size_t i = 0; i < out_shape[1]; ++i) {
      for (std::size_t j = 0; j < out_shape[2]; ++j) {
        double acc = bias[o];
        for (std::size_t c = 0; c < c_in; ++c) {
          for (std::size_t u = 0; u < k_h; ++u) {
            const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(i * stride + u) - pad;
            if (y < 0 || y >= in_h) {
              continue;
            }
            for (std::size_t v = 0; v < k_w; ++v) {
              const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(j * stride + v) - pad;
              if (x < 0 || x >= in_w) {
                continue;
              }
              acc += input.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) *
                     w[((o * c_in + c) * k_h + u) * k_w + v];
            }
          }
        }
        out.at(o, i, j) = acc;
      }
    }
  }
  return out;
}

Tensor conv2d_backward_input(
  const Tensor & grad_output, const Tensor & weights, const Shape & input_shape,
  std::size_t stride, std::size_t padding)
{
  const Shape expected = conv_output_shape(input_shape, weights.shape(), weights.dim(0), stride, padding);
  if (grad_output.shape() != expected) {
    usage_error(
      "conv2d gradient shape " + shape_to_string(grad_output.shape()) + " does not match output " +
      shape_to_string(expected));
  }
  const std::size_t c_out = weights.dim(0);
  const std::size_t c_in = weights.dim(1);
  const std::size_t k_h = weights.dim(2);
  const std::size_t k_w = weights.dim(3);
  const auto in_h = static_cast<std::ptrdiff_t>(input_shape[1]);
  const auto in_w = static_cast<std::ptrdiff_t>(input_shape[2]);
  const auto pad = static_cast<std::ptrdiff_t>(padding);

  Tensor grad_in(input_shape);
  const auto w = weights.data();
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t i = 0; i < expected[1]; ++i) {
      for (std::size_t j = 0; j < expected[2]; ++j) {
        const double g = grad_output.at(o, i, j);
        if (g == 0.0) {
          continue;
        }
        for (std::size_t c = 0; c < c_in; ++c) {
          for (std::size_t u = 0; u < k_h; ++u) {
            const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(i * stride + u) - pad;
            if (y < 0 || y >= in_h) {
              continue;
            }
            for (std::size_t v = 0; v < k_w; ++v) {
              const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(j * stride + v) - pad;
              if (x < 0 || x >= in_w) {
                continue;
              }
              grad_in.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) +=
                g * w[((o * c_in + c) * k_h + u) * k_w + v];
            }
          }
        }
      }
    }
  }
  return grad_in;
}

Tensor relu_forward(const Tensor & input)
{
  Tensor out = input;
  for (double & v : out.data()) {
    v = std::max(0.0, v);
  }
  return out;
}

Tensor relu_backward(const Tensor & grad_output, const Tensor & input)
{
  if (grad_output.shape() != input.shape()) {
    usage_error("relu gradient shape does not match its cached input");
  }
  Tensor grad_in(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    grad_in[i] = input[i] > 0.0 ? grad_output[i] : 0.0;
  }
  return grad_in;
}

MaxPoolResult maxpool_forward(const Tensor & input, std::size_t kernel, std::size_t stride)
{
  const Shape out_shape = pool_output_shape(input.shape(), kernel, stride);
  const std::size_t in_h = input.dim(1);
  const std::size_t in_w = input.dim(2);
  MaxPoolResult result{Tensor(out_shape), std::vector<std::size_t>(shape_size(out_shape))};
  std::size_t cell = 0;
  for (std::size_t c = 0; c < out_shape[0]; ++c) {
    for (std::size_t i = 0; i < out_shape[1]; ++i) {
      for (std::size_t j = 0; j < out_shape[2]; ++j, ++cell) {
        std::size_t best = (c * in_h + i * stride) * in_w + j * stride;
        double best_value = input[best];
        for (std::size_t u = 0; u < kernel; ++u) {
          for (std::size_t v = 0; v < kernel; ++v) {
            const std::size_t idx = (c * in_h + i * stride + u) * in_w + j * stride + v;
            if (input[idx] > best_value) {
              best_value = input[idx];
              best = idx;
            }
          }
        }
        result.output[cell] = best_value;
        result.argmax[cell] = best;
      }
    }
  }
  return result;
}

Tensor maxpool_backward(
  const Tensor & grad_output, std::span<const std::size_t> argmax, const Shape & input_shape)
{
  if (argmax.size() != grad_output.size()) {
    usage_error("maxpool argmax indices do not match the gradient size");
  }
  Tensor grad_in(input_shape);
  for (std::size_t k = 0; k < argmax.size(); ++k) {
    if (argmax[k] >= grad_in.size()) {
      usage_error("maxpool argmax index out of range");
    }
    grad_in[argmax[k]] += grad_output[k];
  }
  return grad_in;
}

Tensor dense_forward(const Tensor & input, const Tensor & weights, const Tensor & bias)
{
  require_rank(bias, 1, "dense bias");
  const Shape out_shape = dense_output_shape(input.shape(), weights.shape(), bias.size());
  const std::size_t n = input.size();
  Tensor out(out_shape);
  for (std::size_t m = 0; m < out_shape[0]; ++m) {
    double acc = bias[m];
    for (std::size_t k = 0; k < n; ++k) {
      acc += weights[m * n + k] * input[k];
    }
    out[m] = acc;
  }
  return out;
}

Tensor dense_backward_input(const Tensor & grad_output, const Tensor & weights)
{
  if (weights.rank() != 2 || grad_output.size() != weights.dim(0)) {
    usage_error("dense gradient length does not match the weight rows");
  }
  const std::size_t m_count = weights.dim(0);
  const std::size_t n = weights.dim(1);
  Tensor grad_in(Shape{n});
  for (std::size_t m = 0; m < m_count; ++m) {
    const double g = grad_output[m];
    if (g == 0.0) {
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      grad_in[k] += weights[m * n + k] * g;
    }
  }
  return grad_in;
}

Tensor softmax(const Tensor & logits)
{
  if (logits.empty()) {
    input_error("softmax of an empty tensor");
  }
  const double peak = *std::max_element(logits.data().begin(), logits.data().end());
  Tensor out(logits.shape());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - peak);
    total += out[k];
  }
  for (double & v : out.data()) {
    v /= total;
  }
  return out;
}

Shape output_shape(const Layer & layer, const Shape & input_shape)
{
  return std::visit(
    Overloaded{
      [&](const Conv2dLayer & l) {
        return conv_output_shape(input_shape, l.weights.shape(), l.bias.size(), l.stride, l.padding);
      },
      [&](const ReluLayer &) { return input_shape; },
      [&](const MaxPoolLayer & l) { return pool_output_shape(input_shape, l.kernel, l.stride); },
      [&](const FlattenLayer &) { return Shape{shape_size(input_shape)}; },
      [&](const DenseLayer & l) {
        return dense_output_shape(input_shape, l.weights.shape(), l.bias.size());
      },
      [&](const SoftmaxLayer &) {
        if (input_shape.size() != 1) {
          config_error("softmax input must be a vector, got " + shape_to_string(input_shape));
        }
        return input_shape;
      },
    },
    layer);
}

Tensor apply_layer(const Layer & layer, const Tensor & input, std::vector<std::size_t> * argmax)
{
  return std::visit(
    Overloaded{
      [&](const Conv2dLayer & l) {
        return conv2d_forward(input, l.weights, l.bias, l.stride, l.padding);
      },
      [&](const ReluLayer &) { return relu_forward(input); },
      [&](const MaxPoolLayer & l) {
        MaxPoolResult r = maxpool_forward(input, l.kernel, l.stride);
        if (argmax != nullptr) {
          *argmax = std::move(r.argmax);
        }
        return std::move(r.output);
      },
      [&](const FlattenLayer &) { return input.reshaped(Shape{input.size()}); },
      [&](const DenseLayer & l) { return dense_forward(input, l.weights, l.bias); },
      [&](const SoftmaxLayer &) {
        output_shape(layer, input.shape());
        return softmax(input);
      },
    },
    layer);
}

ForwardTrace forward_trace(std::span<const Layer> layers, const Tensor & input)
{
  ForwardTrace trace;
  trace.layers.reserve(layers.size());
  Tensor current = input;
  for (const Layer & layer : layers) {
    LayerTrace entry;
    Tensor next = apply_layer(layer, current, &entry.argmax);
    entry.output_shape = next.shape();
    entry.input = std::move(current);
    trace.layers.push_back(std::move(entry));
    current = std::move(next);
  }
  trace.output = std::move(current);
  return trace;
}

Tensor forward_plain(std::span<const Layer> layers, const Tensor & input)
{
  Tensor current = input;
  for (const Layer & layer : layers) {
    current = apply_layer(layer, current);
  }
  return current;
}

namespace
{

// Number of layers that take part in backward: everything but a final softmax.
std::size_t differentiable_prefix(std::span<const Layer> tail)
{
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (std::holds_alternative<SoftmaxLayer>(tail[i])) {
      if (i + 1 != tail.size()) {
        config_error("softmax is only supported as the final layer");
      }
      return i;
    }
  }
  return tail.size();
}

void check_cache(std::span<const Layer> tail, std::span<const LayerTrace> cache)
{
  if (tail.empty()) {
    usage_error("backward needs at least one layer after the target activation");
  }
  if (cache.size() != tail.size()) {
    usage_error(
      "missing cached forward state: " + std::to_string(cache.size()) + " entries for " +
      std::to_string(tail.size()) + " layers");
  }
}

}  // namespace

std::size_t logit_count(std::span<const Layer> tail, std::span<const LayerTrace> cache)
{
  check_cache(tail, cache);
  const std::size_t n = differentiable_prefix(tail);
  if (n == 0) {
    return cache.front().input.size();
  }
  return shape_size(cache[n - 1].output_shape);
}

Tensor backward_to_layer(
  std::span<const Layer> tail, std::span<const LayerTrace> cache, const Tensor & seed)
{
  check_cache(tail, cache);
  const std::size_t n = differentiable_prefix(tail);
  const Shape logit_shape = n == 0 ? cache.front().input.shape() : cache[n - 1].output_shape;
  if (seed.size() != shape_size(logit_shape)) {
    input_error(
      "seed gradient has " + std::to_string(seed.size()) + " entries, expected " +
      std::to_string(shape_size(logit_shape)));
  }
  Tensor grad = seed.reshaped(logit_shape);
  for (std::size_t k = n; k-- > 0;) {
    const LayerTrace & state = cache[k];
    if (state.input.empty()) {
      usage_error("missing cached forward state for layer " + std::to_string(k));
    }
    grad = std::visit(
      Overloaded{
        [&](const Conv2dLayer & l) {
          return conv2d_backward_input(grad, l.weights, state.input.shape(), l.stride, l.padding);
        },
        [&](const ReluLayer &) { return relu_backward(grad, state.input); },
        [&](const MaxPoolLayer &) {
          if (state.argmax.size() != grad.size()) {
            usage_error("missing cached argmax indices for maxpool layer " + std::to_string(k));
          }
          return maxpool_backward(grad, state.argmax, state.input.shape());
        },
        [&](const FlattenLayer &) { return grad.reshaped(state.input.shape()); },
        [&](const DenseLayer & l) { return dense_backward_input(grad, l.weights); },
        [&](const SoftmaxLayer &) -> Tensor {
          usage_error("softmax cannot be backpropagated");
        },
      },
      tail[k]);
  }
  return grad;
}

Tensor backward_to_layer(
  std::span<const Layer> tail, std::span<const LayerTrace> cache, std::size_t seed_class)
{
  const std::size_t classes = logit_count(tail, cache);
  if (seed_class >= classes) {
    input_error(
      "class index " + std::to_string(seed_class) + " out of range for " +
      std::to_string(classes) + " classes");
  }
  Tensor seed(Shape{classes});
  seed[seed_class] = 1.0;
  return backward_to_layer(tail, cache, seed);
}

}  // namespace camgate
