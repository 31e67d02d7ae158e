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

// Constructed models, images and datasets with known outcomes.

#include "camgate/harness.hpp"
#include "camgate/imaging.hpp"
#include "camgate/model.hpp"
#include "camgate/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace camgate::fixtures
{

inline constexpr std::size_t kPlantedSide = 224;
inline constexpr std::size_t kRegionSide = 56;
inline constexpr double kEmptyBias = 8.0;
inline constexpr double kEmptyWeight = 1e-4;

/// Class labels of the planted model, in logit order.
std::vector<std::string> planted_labels();

/// Model-space 56x56 region read by planted class k (k = 0, 1, 2).
BoundingBox planted_region(std::size_t k);

// Planted model: input 1x224x224 -> conv 1x1 (weight 1, bias 0) -> relu ->
// flatten -> dense -> softmax. Logit k < 3 is the sum of pixels (/255) inside
// planted_region(k); the "empty" logit is kEmptyBias + kEmptyWeight * (sum of all pixels).
ModelManifest planted_manifest();
std::vector<float> planted_weights();
Model planted_model();

struct ModelFiles
{
  std::filesystem::path manifest;
  std::filesystem::path weights;
};

ModelFiles write_model(const std::filesystem::path & dir, const ModelManifest & manifest, const std::vector<float> & weights);
ModelFiles write_planted_model(const std::filesystem::path & dir);

/// Grey image with sparse faint noise (values 0..2) and a bright textured
/// square (values 200..255). Deterministic in `seed`.
Image square_image(std::size_t width, std::size_t height, const BoundingBox & square, std::uint32_t seed);

/// Black image with a few dim dots confined to rows [0, dot_rows).
Image dots_image(std::size_t width, std::size_t height, std::size_t dot_rows, std::uint32_t seed);

/// 224x224 input whose bright square is planted_region(1).
Image trigger_image();

struct PlantedSuite
{
  std::filesystem::path dir;
  std::filesystem::path annotations;  // 12 samples
  std::filesystem::path all_pass_annotations;  // the 8 PASS samples
  std::vector<AnnotatedSample> samples;
  std::map<std::string, Status> planted;  // expected verdict per sample id
};

/// Writes images (448x448, mixed PNG and PPM) and annotation files into `dir`.
/// Outcomes at the default policy: 8 PASS, 3 FAIL, 1 INCONCLUSIVE.
PlantedSuite write_planted_suite(const std::filesystem::path & dir);

/// JSON-lines text for `samples`, written independently of the library's serializer.
std::string annotation_lines(const std::vector<AnnotatedSample> & samples, const std::filesystem::path & base_dir);

/// Fresh empty directory under the system temp path.
std::filesystem::path scratch_dir(const std::string & name);

/// Small random sequential CNN with a chosen activation to differentiate against.
struct RandomNetwork
{
  std::vector<Layer> layers;
  Tensor input;
  std::size_t classes = 0;
};

/// <= 2 conv layers, input <= 1x8x8 (or up to 3 channels when `max_channels` allows),
/// <= 4 classes, depth <= 5 ignoring a final softmax.
RandomNetwork random_network(std::mt19937_64 & rng, std::size_t max_channels = 1);

double uniform(std::mt19937_64 & rng, double lo, double hi);
Tensor random_tensor(std::mt19937_64 & rng, Shape shape, double lo = -1.0, double hi = 1.0);

}  // namespace camgate::fixtures
