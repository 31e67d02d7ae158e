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
#include "camgate/model.hpp"
#include "camgate/tensor.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace camgate
{

/// Normalized class activation map. Values lie in [0,1]; the maximum is exactly
/// 1 unless the map is degenerate (raw maximum 0, all values 0).
struct Heatmap
{
  ScalarMap map;
  double raw_max = 0.0;
  bool degenerate = false;
  std::string sample_id;
  std::size_t class_index = 0;
  std::string class_label;

  bool operator==(const Heatmap &) const = default;
};

struct CombinedHeatmap
{
  ScalarMap map;
  std::size_t sample_count = 0;
  std::vector<std::string> sample_ids;  // contributing, in fold order
  std::vector<std::string> excluded_ids;  // degenerate inputs
};

/// alpha[k] = mean over (i,j) of gradient[k,i,j].
Tensor channel_weights(const Tensor & gradient);

/// raw[i,j] = max(0, sum_k alpha[k] * activation[k,i,j]).
Tensor cam(const Tensor & activation, const Tensor & alpha);

/// Divides by the maximum, or flags the map as degenerate when it is all zero.
Heatmap normalize(const Tensor & raw);

/// Grad-CAM for one inference, upsampled to `out_w` x `out_h`. When the
/// upsampled grid misses the feature-map peak it is rescaled so the maximum is
/// again exactly 1. `class_index` defaults to the predicted class.
Heatmap gradcam_for(
  const Model & model, const InferenceRecord & record, std::optional<std::size_t> class_index,
  std::size_t out_w, std::size_t out_h);

/// Running pixel-wise sum of normalized maps. Feeding maps in ascending
/// sample_id order reproduces combined() bit for bit.
class CombinedAccumulator
{
public:
  /// Degenerate maps are recorded as excluded; size mismatches are an input error.
  void add(const Heatmap & heatmap);
  [[nodiscard]] std::size_t contributing() const noexcept { return sample_ids_.size(); }
  /// Throws "no valid heatmaps to combine" when nothing contributed.
  [[nodiscard]] CombinedHeatmap finish() const;

private:
  ScalarMap sum_;
  std::vector<std::string> sample_ids_;
  std::vector<std::string> excluded_ids_;
};

/// Pixel-wise mean of the non-degenerate maps, folded in ascending sample_id
/// order so the result is independent of input order.
CombinedHeatmap combined(std::span<const Heatmap> heatmaps);

/// Sum of map values over pixels where `mask` is true.
double masked_mass(const ScalarMap & map, const std::vector<bool> & mask);

nlohmann::json heatmap_sidecar(const Heatmap & heatmap);
nlohmann::json combined_sidecar(const CombinedHeatmap & combined);

}  // namespace camgate
