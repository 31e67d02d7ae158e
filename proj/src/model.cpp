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

#include "camgate/model.hpp"

#include "camgate/error.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <utility>

namespace camgate
{

using nlohmann::json;

std::string to_string(LayerKind kind)
{
  switch (kind) {
    case LayerKind::Conv2d:
      return "conv2d";
    case LayerKind::Relu:
      return "relu";
    case LayerKind::MaxPool:
      return "maxpool";
    case LayerKind::Flatten:
      return "flatten";
    case LayerKind::Dense:
      return "dense";
    case LayerKind::Softmax:
      return "softmax";
  }
  return "unknown";
}

namespace
{

LayerKind parse_kind(const std::string & text, const std::string & path)
{
  for (LayerKind kind :
       {LayerKind::Conv2d, LayerKind::Relu, LayerKind::MaxPool, LayerKind::Flatten, LayerKind::Dense,
        LayerKind::Softmax}) {
    if (to_string(kind) == text) {
      return kind;
    }
  }
  config_error(
    path + ": unknown layer kind '" + text + "' (expected conv2d, relu, maxpool, flatten, dense or softmax)");
}

const json * field(const json & obj, const char * key)
{
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::size_t as_count(const json & value, const std::string & path, bool allow_zero)
{
  if (!value.is_number_integer()) {
    config_error(path + ": expected an integer");
  }
  const auto v = value.get<std::int64_t>();
  if (v < 0 || (!allow_zero && v == 0)) {
    config_error(path + (allow_zero ? ": must be non-negative" : ": must be positive"));
  }
  return static_cast<std::size_t>(v);
}

std::size_t required_count(const json & obj, const char * key, const std::string & path)
{
  const json * v = field(obj, key);
  if (v == nullptr) {
    config_error(path + "." + key + ": missing required field");
  }
  return as_count(*v, path + "." + key, false);
}

std::size_t optional_count(
  const json & obj, const char * key, const std::string & path, std::size_t fallback, bool allow_zero)
{
  const json * v = field(obj, key);
  return v == nullptr ? fallback : as_count(*v, path + "." + key, allow_zero);
}

void reject_unknown(const json & obj, std::initializer_list<const char *> allowed, const std::string & path)
{
  for (const auto & [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char * a) { return key == a; })) {
      config_error(path + "." + key + ": unknown field");
    }
  }
}

std::vector<double> number_array(const json & value, const std::string & path)
{
  if (!value.is_array()) {
    config_error(path + ": expected an array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_number()) {
      config_error(path + "[" + std::to_string(i) + "]: expected a number");
    }
    out.push_back(value[i].get<double>());
  }
  return out;
}

LayerSpec parse_layer(const json & obj, const std::string & path)
{
  if (!obj.is_object()) {
    config_error(path + ": expected an object");
  }
  const json * kind = field(obj, "kind");
  if (kind == nullptr || !kind->is_string()) {
    config_error(path + ".kind: missing or not a string");
  }
  LayerSpec spec;
  spec.kind = parse_kind(kind->get<std::string>(), path + ".kind");
  if (const json * name = field(obj, "name")) {
    if (!name->is_string()) {
      config_error(path + ".name: expected a string");
    }
    spec.name = name->get<std::string>();
  }
  switch (spec.kind) {
    case LayerKind::Conv2d:
      reject_unknown(obj, {"kind", "name", "in_channels", "out_channels", "kernel", "stride", "padding"}, path);
      spec.in_channels = required_count(obj, "in_channels", path);
      spec.out_channels = required_count(obj, "out_channels", path);
      spec.kernel = required_count(obj, "kernel", path);
      spec.stride = optional_count(obj, "stride", path, 1, false);
      spec.padding = optional_count(obj, "padding", path, 0, true);
      break;
    case LayerKind::MaxPool:
      reject_unknown(obj, {"kind", "name", "kernel", "stride"}, path);
      spec.kernel = required_count(obj, "kernel", path);
      spec.stride = optional_count(obj, "stride", path, spec.kernel, false);
      break;
    case LayerKind::Dense:
      reject_unknown(obj, {"kind", "name", "in_features", "out_features"}, path);
      spec.in_features = required_count(obj, "in_features", path);
      spec.out_features = required_count(obj, "out_features", path);
      break;
    case LayerKind::Relu:
    case LayerKind::Flatten:
    case LayerKind::Softmax:
      reject_unknown(obj, {"kind", "name"}, path);
      break;
  }
  return spec;
}

}  // namespace

ModelManifest parse_manifest(const json & doc)
{
  if (!doc.is_object()) {
    config_error("manifest: expected a JSON object");
  }
  reject_unknown(
    doc, {"format_version", "input_shape", "class_labels", "normalization", "layers", "target_layer"},
    "manifest");
  ModelManifest m;

  const json * version = field(doc, "format_version");
  if (version == nullptr || !version->is_number_integer()) {
    config_error("manifest.format_version: missing or not an integer");
  }
  m.format_version = version->get<int>();
  if (m.format_version != 1) {
    config_error("manifest.format_version: unsupported version " + std::to_string(m.format_version));
  }

  const json * shape = field(doc, "input_shape");
  if (shape == nullptr || !shape->is_array() || shape->size() != 3) {
    config_error("manifest.input_shape: expected [C,H,W]");
  }
  for (std::size_t i = 0; i < 3; ++i) {
    m.input_shape.push_back(as_count((*shape)[i], "manifest.input_shape[" + std::to_string(i) + "]", false));
  }

  const json * labels = field(doc, "class_labels");
  if (labels == nullptr || !labels->is_array() || labels->empty()) {
    config_error("manifest.class_labels: expected a non-empty array of strings");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < labels->size(); ++i) {
    const std::string path = "manifest.class_labels[" + std::to_string(i) + "]";
    if (!(*labels)[i].is_string() || (*labels)[i].get<std::string>().empty()) {
      config_error(path + ": expected a non-empty string");
    }
    const auto label = (*labels)[i].get<std::string>();
    if (!seen.insert(label).second) {
      config_error(path + ": duplicate label '" + label + "'");
    }
    m.class_labels.push_back(label);
  }

  if (const json * norm = field(doc, "normalization")) {
    if (!norm->is_object()) {
      config_error("manifest.normalization: expected an object");
    }
    reject_unknown(*norm, {"mean", "std"}, "manifest.normalization");
    const json * mean = field(*norm, "mean");
    const json * stdev = field(*norm, "std");
    if (mean == nullptr || stdev == nullptr) {
      config_error("manifest.normalization: requires both mean and std");
    }
    Normalization n{number_array(*mean, "manifest.normalization.mean"), number_array(*stdev, "manifest.normalization.std")};
    for (std::size_t c = 0; c < n.std.size(); ++c) {
      if (!(n.std[c] > 0.0)) {
        config_error("manifest.normalization.std[" + std::to_string(c) + "]: must be positive");
      }
    }
    if (n.mean.size() != m.input_shape[0] || n.std.size() != m.input_shape[0]) {
      config_error("manifest.normalization: mean and std need one entry per input channel");
    }
    m.normalization = std::move(n);
  }

  const json * layers = field(doc, "layers");
  if (layers == nullptr || !layers->is_array() || layers->empty()) {
    config_error("manifest.layers: expected a non-empty array");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < layers->size(); ++i) {
    const std::string path = "manifest.layers[" + std::to_string(i) + "]";
    LayerSpec spec = parse_layer((*layers)[i], path);
    if (!spec.name.empty() && !names.insert(spec.name).second) {
      config_error(path + ".name: duplicate layer name '" + spec.name + "'");
    }
    m.layers.push_back(std::move(spec));
  }

  if (const json * target = field(doc, "target_layer")) {
    if (target->is_number_integer()) {
      m.target_layer = as_count(*target, "manifest.target_layer", true);
    } else if (target->is_string()) {
      m.target_layer = target->get<std::string>();
    } else {
      config_error("manifest.target_layer: expected a layer index or name");
    }
  }
  return m;
}

ModelManifest read_manifest(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    config_error("cannot open model manifest '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error & e) {
    config_error("model manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_manifest(doc);
}

json manifest_to_json(const ModelManifest & m)
{
  json doc;
  doc["format_version"] = m.format_version;
  doc["input_shape"] = m.input_shape;
  doc["class_labels"] = m.class_labels;
  if (m.normalization) {
    doc["normalization"] = {{"mean", m.normalization->mean}, {"std", m.normalization->std}};
  }
  json layers = json::array();
  for (const LayerSpec & spec : m.layers) {
    json l;
    l["kind"] = to_string(spec.kind);
    if (!spec.name.empty()) {
      l["name"] = spec.name;
    }
    switch (spec.kind) {
      case LayerKind::Conv2d:
        l["in_channels"] = spec.in_channels;
        l["out_channels"] = spec.out_channels;
        l["kernel"] = spec.kernel;
        l["stride"] = spec.stride;
        l["padding"] = spec.padding;
        break;
      case LayerKind::MaxPool:
        l["kernel"] = spec.kernel;
        l["stride"] = spec.stride;
        break;
      case LayerKind::Dense:
        l["in_features"] = spec.in_features;
        l["out_features"] = spec.out_features;
        break;
      default:
        break;
    }
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);
  if (m.target_layer) {
    std::visit([&](const auto & ref) { doc["target_layer"] = ref; }, *m.target_layer);
  }
  return doc;
}

std::size_t parameter_count(const LayerSpec & layer)
{
  switch (layer.kind) {
    case LayerKind::Conv2d:
      return layer.out_channels * layer.in_channels * layer.kernel * layer.kernel + layer.out_channels;
    case LayerKind::Dense:
      return layer.out_features * layer.in_features + layer.out_features;
    default:
      return 0;
  }
}

// ---------------------------------------------------------------------------
// Weights file: raw little-endian float32, no header.

std::vector<float> read_weights(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    config_error("cannot open weights file '" + path.string() + "'");
  }
  const std::vector<char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() % 4 != 0) {
    config_error(
      "weights file '" + path.string() + "' has " + std::to_string(bytes.size()) +
      " bytes, not a whole number of float32 values");
  }
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    }
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

void write_weights(const std::filesystem::path & path, std::span<const float> weights)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    config_error("cannot write weights file '" + path.string() + "'");
  }
  for (const float w : weights) {
    const auto bits = std::bit_cast<std::uint32_t>(w);
    const char bytes[4] = {
      static_cast<char>(bits & 0xffU), static_cast<char>((bits >> 8) & 0xffU),
      static_cast<char>((bits >> 16) & 0xffU), static_cast<char>((bits >> 24) & 0xffU)};
    out.write(bytes, 4);
  }
}

// ---------------------------------------------------------------------------
// Model

namespace
{

Tensor take(std::span<const float> weights, std::size_t & offset, Shape shape)
{
  const std::size_t n = shape_size(shape);
  std::vector<double> data(weights.begin() + static_cast<std::ptrdiff_t>(offset),
                           weights.begin() + static_cast<std::ptrdiff_t>(offset + n));
  offset += n;
  return Tensor(std::move(shape), std::move(data));
}

std::size_t expected_weight_count(const ModelManifest & m)
{
  std::size_t total = 0;
  for (const LayerSpec & spec : m.layers) {
    total += parameter_count(spec);
  }
  return total;
}

}  // namespace

Model Model::build(ModelManifest manifest, std::span<const float> weights)
{
  const std::size_t expected = expected_weight_count(manifest);
  if (weights.size() != expected) {
    config_error(
      "weights size mismatch: expected " + std::to_string(expected * 4) + " bytes (" +
      std::to_string(expected) + " float32 values), got " + std::to_string(weights.size() * 4) + " bytes");
  }

  Model model;
  model.parameter_count_ = expected;
  std::size_t offset = 0;
  Shape current = manifest.input_shape;
  bool has_conv = false;
  for (std::size_t i = 0; i < manifest.layers.size(); ++i) {
    const LayerSpec & spec = manifest.layers[i];
    const std::string path = "manifest.layers[" + std::to_string(i) + "]";
    Layer layer;
    switch (spec.kind) {
      case LayerKind::Conv2d:
        if (current.size() != 3 || current[0] != spec.in_channels) {
          config_error(
            path + ".in_channels: " + std::to_string(spec.in_channels) + " does not match incoming shape " +
            shape_to_string(current));
        }
        has_conv = true;
        layer = Conv2dLayer{
          take(weights, offset, {spec.out_channels, spec.in_channels, spec.kernel, spec.kernel}),
          take(weights, offset, {spec.out_channels}), spec.stride, spec.padding};
        break;
      case LayerKind::Dense:
        if (current.size() != 1 || current[0] != spec.in_features) {
          config_error(
            path + ".in_features: " + std::to_string(spec.in_features) + " does not match incoming shape " +
            shape_to_string(current));
        }
        layer = DenseLayer{
          take(weights, offset, {spec.out_features, spec.in_features}), take(weights, offset, {spec.out_features})};
        break;
      case LayerKind::MaxPool:
        layer = MaxPoolLayer{spec.kernel, spec.stride};
        break;
      case LayerKind::Relu:
        layer = ReluLayer{};
        break;
      case LayerKind::Flatten:
        layer = FlattenLayer{};
        break;
      case LayerKind::Softmax:
        if (i + 1 != manifest.layers.size()) {
          config_error(path + ": softmax is only supported as the final layer");
        }
        layer = SoftmaxLayer{};
        break;
    }
    try {
      current = output_shape(layer, current);
    } catch (const Error & e) {
      config_error(path + ": " + e.what());
    }
    model.output_shapes_.push_back(current);
    model.layers_.push_back(std::move(layer));
  }
  if (!has_conv) {
    config_error("Grad-CAM requires a convolutional layer");
  }
  if (current.size() != 1 || current[0] != manifest.class_labels.size()) {
    config_error(
      "network output " + shape_to_string(current) + " does not match " +
      std::to_string(manifest.class_labels.size()) + " class labels");
  }
  model.manifest_ = std::move(manifest);
  model.select_target(model.manifest_.target_layer);
  return model;
}

void Model::select_target(const std::optional<LayerRef> & ref)
{
  const auto & specs = manifest_.layers;
  std::size_t index = specs.size();
  if (!ref) {
    for (std::size_t i = specs.size(); i-- > 0;) {
      if (specs[i].kind == LayerKind::Conv2d) {
        index = i;
        break;
      }
    }
  } else if (const auto * pos = std::get_if<std::size_t>(&*ref)) {
    if (*pos >= specs.size()) {
      config_error("target layer index " + std::to_string(*pos) + " out of range");
    }
    index = *pos;
  } else {
    const auto & name = std::get<std::string>(*ref);
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const LayerSpec & s) { return s.name == name; });
    if (it == specs.end()) {
      config_error("target layer '" + name + "' not found");
    }
    index = static_cast<std::size_t>(it - specs.begin());
  }
  if (specs[index].kind != LayerKind::Conv2d) {
    config_error("target layer " + layer_display_name(index) + " is not a conv2d layer");
  }
  target_layer_ = index;
  activation_layer_ =
    (index + 1 < specs.size() && specs[index + 1].kind == LayerKind::Relu) ? index + 1 : index;
}

std::string Model::layer_display_name(std::size_t index) const
{
  const LayerSpec & spec = manifest_.layers.at(index);
  return spec.name.empty() ? to_string(spec.kind) + "#" + std::to_string(index) : spec.name;
}

Model Model::with_target_layer(const LayerRef & ref) const
{
  Model copy = *this;
  copy.select_target(ref);
  return copy;
}

std::optional<std::size_t> Model::class_index(const std::string & label) const
{
  const auto & labels = manifest_.class_labels;
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - labels.begin());
}

Model load_model(const std::filesystem::path & manifest_path, const std::filesystem::path & weights_path)
{
  ModelManifest manifest = read_manifest(manifest_path);
  const std::vector<float> weights = read_weights(weights_path);
  const std::size_t expected = expected_weight_count(manifest);
  if (weights.size() != expected) {
    config_error(
      "weights file '" + weights_path.string() + "' size mismatch: expected " + std::to_string(expected * 4) +
      " bytes, actual " + std::to_string(weights.size() * 4) + " bytes");
  }
  return Model::build(std::move(manifest), weights);
}

// ---------------------------------------------------------------------------
// Inference

InferenceRecord forward(const Model & model, const Tensor & image)
{
  if (image.shape() != model.input_shape()) {
    input_error(
      "input shape " + shape_to_string(image.shape()) + " does not match model input " +
      shape_to_string(model.input_shape()));
  }
  InferenceRecord record;
  record.trace = forward_trace(model.layers(), image);
  if (std::holds_alternative<SoftmaxLayer>(model.layers().back())) {
    record.logits = record.trace.layers.back().input;
    record.probabilities = record.trace.output;
  } else {
    record.logits = record.trace.output;
    record.probabilities = softmax(record.logits);
  }
  const auto probs = record.probabilities.data();
  record.predicted_class = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  record.confidence = probs[record.predicted_class];
  record.target_activation = record.trace.layers.at(model.activation_layer() + 1).input;
  return record;
}

Tensor class_score_gradient(const Model & model, const InferenceRecord & record, std::size_t class_index)
{
  if (record.trace.layers.size() != model.layers().size()) {
    usage_error("inference record was not produced by this model");
  }
  if (class_index >= model.class_count()) {
    input_error(
      "class index " + std::to_string(class_index) + " out of range for " +
      std::to_string(model.class_count()) + " classes");
  }
  const std::size_t first = model.activation_layer() + 1;
  const auto tail = model.layers().subspan(first);
  const auto cache = std::span<const LayerTrace>(record.trace.layers).subspan(first);
  return backward_to_layer(tail, cache, class_index);
}

}  // namespace camgate
