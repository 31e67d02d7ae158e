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

#include "camgate/gradcam.hpp"

#include "camgate/error.hpp"

#include <algorithm>
#include <numeric>

namespace camgate
{

Tensor channel_weights(const Tensor & gradient)
{
  if (gradient.rank() != 3) {
    input_error("gradient must be [C,H,W], got " + shape_to_string(gradient.shape()));
  }
  const std::size_t channels = gradient.dim(0);
  const std::size_t area = gradient.dim(1) * gradient.dim(2);
  Tensor alpha(Shape{channels});
  for (std::size_t k = 0; k < channels; ++k) {
    double sum = 0.0;
    for (std::size_t p = 0; p < area; ++p) {
      sum += gradient[k * area + p];
    }
    alpha[k] = sum / static_cast<double>(area);
  }
  return alpha;
}

Tensor cam(const Tensor & activation, const Tensor & alpha)
{
  if (activation.rank() != 3 || alpha.rank() != 1 || activation.dim(0) != alpha.dim(0)) {
    input_error(
      "activation " + shape_to_string(activation.shape()) + " and channel weights " +
      shape_to_string(alpha.shape()) + " disagree on channel count");
  }
  const std::size_t h = activation.dim(1);
  const std::size_t w = activation.dim(2);
  Tensor raw(Shape{h, w});
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < alpha.size(); ++k) {
        acc += alpha[k] * activation.at(k, i, j);
      }
      raw.at(i, j) = std::max(0.0, acc);
    }
  }
  return raw;
}

Heatmap normalize(const Tensor & raw)
{
  if (raw.rank() != 2) {
    input_error("raw map must be [H,W], got " + shape_to_string(raw.shape()));
  }
  Heatmap heat;
  heat.map = ScalarMap(raw.dim(1), raw.dim(0));
  const auto values = raw.data();
  heat.raw_max = values.empty() ? 0.0 : std::max(0.0, *std::max_element(values.begin(), values.end()));
  heat.degenerate = !(heat.raw_max > 0.0);
  if (heat.degenerate) {
    heat.raw_max = 0.0;
    return heat;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    heat.map.values[i] = std::max(0.0, values[i]) / heat.raw_max;
  }
  return heat;
}

Heatmap gradcam_for(
  const Model & model, const InferenceRecord & record, std::optional<std::size_t> class_index,
  std::size_t out_w, std::size_t out_h)
{
  const std::size_t cls = class_index.value_or(record.predicted_class);
  const Tensor gradient = class_score_gradient(model, record, cls);
  const Tensor raw = cam(record.target_activation, channel_weights(gradient));
  Heatmap heat = normalize(raw);
  heat.class_index = cls;
  heat.class_label = model.class_labels()[cls];
  heat.map = resize_bilinear(heat.map, out_w, out_h);
  if (!heat.degenerate) {
    const double peak = *std::max_element(heat.map.values.begin(), heat.map.values.end());
    if (peak != 1.0) {
      for (double & v : heat.map.values) {
        v /= peak;
      }
    }
  }
  return heat;
}

void CombinedAccumulator::add(const Heatmap & heatmap)
{
  if (heatmap.degenerate) {
    excluded_ids_.push_back(heatmap.sample_id);
    return;
  }
  if (sample_ids_.empty()) {
    sum_ = ScalarMap(heatmap.map.width, heatmap.map.height);
  } else if (heatmap.map.width != sum_.width || heatmap.map.height != sum_.height) {
    input_error(
      "cannot combine heatmaps of different sizes: '" + sample_ids_.front() + "' is " +
      std::to_string(sum_.width) + "x" + std::to_string(sum_.height) + ", '" + heatmap.sample_id + "' is " +
      std::to_string(heatmap.map.width) + "x" + std::to_string(heatmap.map.height));
  }
  for (std::size_t i = 0; i < sum_.values.size(); ++i) {
    sum_.values[i] += heatmap.map.values[i];
  }
  sample_ids_.push_back(heatmap.sample_id);
}

CombinedHeatmap CombinedAccumulator::finish() const
{
  if (sample_ids_.empty()) {
    input_error("no valid heatmaps to combine");
  }
  CombinedHeatmap out{sum_, sample_ids_.size(), sample_ids_, excluded_ids_};
  const auto n = static_cast<double>(out.sample_count);
  for (double & v : out.map.values) {
    v /= n;
  }
  return out;
}

CombinedHeatmap combined(std::span<const Heatmap> heatmaps)
{
  std::vector<const Heatmap *> order;
  order.reserve(heatmaps.size());
  for (const Heatmap & h : heatmaps) {
    order.push_back(&h);
  }
  std::stable_sort(order.begin(), order.end(), [](const Heatmap * a, const Heatmap * b) {
    return a->sample_id < b->sample_id;
  });
  CombinedAccumulator acc;
  for (const Heatmap * h : order) {
    acc.add(*h);
  }
  return acc.finish();
}

double masked_mass(const ScalarMap & map, const std::vector<bool> & mask)
{
  double mass = 0.0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (mask[i]) {
      mass += map.values[i];
    }
  }
  return mass;
}

nlohmann::json heatmap_sidecar(const Heatmap & heatmap)
{
  return {
    {"kind", "heatmap"},
    {"sample_id", heatmap.sample_id},
    {"class_index", heatmap.class_index},
    {"class_label", heatmap.class_label},
    {"raw_max", heatmap.raw_max},
    {"degenerate", heatmap.degenerate},
    {"width", heatmap.map.width},
    {"height", heatmap.map.height},
    {"values", heatmap.map.values},
  };
}

nlohmann::json combined_sidecar(const CombinedHeatmap & combined)
{
  return {
    {"kind", "combined_heatmap"},
    {"sample_count", combined.sample_count},
    {"sample_ids", combined.sample_ids},
    {"excluded_ids", combined.excluded_ids},
    {"width", combined.map.width},
    {"height", combined.map.height},
    {"values", combined.map.values},
  };
}

}  // namespace camgate
