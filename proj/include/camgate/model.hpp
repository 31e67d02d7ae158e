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

#include "camgate/imaging.hpp"
#include "camgate/numerics.hpp"
#include "camgate/tensor.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace camgate
{

enum class LayerKind
{
  Conv2d,
  Relu,
  MaxPool,
  Flatten,
  Dense,
  Softmax,
};

std::string to_string(LayerKind kind);

/// One entry of the manifest's `layers` array. Fields not used by `kind` stay zero.
struct LayerSpec
{
  LayerKind kind = LayerKind::Relu;
  std::string name;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 0;
  std::size_t padding = 0;
  std::size_t in_features = 0;
  std::size_t out_features = 0;

  bool operator==(const LayerSpec &) const = default;
};

/// A layer referenced by position in `layers` or by its name.
using LayerRef = std::variant<std::size_t, std::string>;

struct ModelManifest
{
  int format_version = 1;
  Shape input_shape;  // [C,H,W]
  std::vector<std::string> class_labels;
  std::optional<Normalization> normalization;
  std::vector<LayerSpec> layers;
  std::optional<LayerRef> target_layer;

  bool operator==(const ModelManifest &) const = default;
};

/// Validates field presence and types; errors carry the JSON field path.
ModelManifest parse_manifest(const nlohmann::json & doc);
ModelManifest read_manifest(const std::filesystem::path & path);
nlohmann::json manifest_to_json(const ModelManifest & manifest);

/// Trainable scalars of one layer (weights plus bias).
std::size_t parameter_count(const LayerSpec & layer);

std::vector<float> read_weights(const std::filesystem::path & path);
void write_weights(const std::filesystem::path & path, std::span<const float> weights);

/// Immutable, validated network ready for inference. Safe to share across threads.
class Model
{
public:
  /// Checks the layer chain by shape propagation and widens `weights` to double.
  static Model build(ModelManifest manifest, std::span<const float> weights);

  [[nodiscard]] const ModelManifest & manifest() const noexcept { return manifest_; }
  [[nodiscard]] std::span<const Layer> layers() const noexcept { return layers_; }
  [[nodiscard]] const Shape & input_shape() const noexcept { return manifest_.input_shape; }
  [[nodiscard]] const std::vector<std::string> & class_labels() const noexcept { return manifest_.class_labels; }
  [[nodiscard]] std::size_t class_count() const noexcept { return manifest_.class_labels.size(); }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return parameter_count_; }
  [[nodiscard]] const std::vector<Shape> & layer_output_shapes() const noexcept { return output_shapes_; }
  [[nodiscard]] const Normalization * normalization() const noexcept
  {
    return manifest_.normalization ? &*manifest_.normalization : nullptr;
  }

  /// Index of the conv2d layer whose activations feed Grad-CAM.
  [[nodiscard]] std::size_t target_layer() const noexcept { return target_layer_; }
  /// Index of the layer whose output is the Grad-CAM activation: the target
  /// conv2d, or the ReLU directly after it.
  [[nodiscard]] std::size_t activation_layer() const noexcept { return activation_layer_; }
  [[nodiscard]] std::string layer_display_name(std::size_t index) const;

  /// Copy of this model with another conv2d layer as target.
  [[nodiscard]] Model with_target_layer(const LayerRef & ref) const;

  [[nodiscard]] std::optional<std::size_t> class_index(const std::string & label) const;

private:
  Model() = default;
  void select_target(const std::optional<LayerRef> & ref);

  ModelManifest manifest_;
  std::vector<Layer> layers_;
  std::vector<Shape> output_shapes_;
  std::size_t parameter_count_ = 0;
  std::size_t target_layer_ = 0;
  std::size_t activation_layer_ = 0;
};

Model load_model(const std::filesystem::path & manifest_path, const std::filesystem::path & weights_path);

struct InferenceRecord
{
  ForwardTrace trace;
  Tensor logits;
  Tensor probabilities;
  std::size_t predicted_class = 0;  // argmax, ties to the lowest index
  double confidence = 0.0;
  Tensor target_activation;  // [C_t,H_t,W_t]

  bool operator==(const InferenceRecord &) const = default;
};

InferenceRecord forward(const Model & model, const Tensor & image);

/// Gradient of logit `class_index` w.r.t. `record.target_activation`.
Tensor class_score_gradient(const Model & model, const InferenceRecord & record, std::size_t class_index);

}  // namespace camgate
