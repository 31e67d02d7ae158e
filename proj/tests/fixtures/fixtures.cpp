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

#include "fixtures.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace camgate::fixtures
{

std::vector<std::string> planted_labels()
{
  return {"pedestrian", "dog walker", "bicyclist", "empty"};
}

BoundingBox planted_region(std::size_t k)
{
  static constexpr std::size_t kLeft[3] = {16, 84, 152};
  return {kLeft[k], 84, kLeft[k] + kRegionSide, 84 + kRegionSide};
}

ModelManifest planted_manifest()
{
  ModelManifest m;
  m.input_shape = {1, kPlantedSide, kPlantedSide};
  m.class_labels = planted_labels();
  LayerSpec conv{LayerKind::Conv2d, "features"};
  conv.in_channels = 1;
  conv.out_channels = 1;
  conv.kernel = 1;
  conv.stride = 1;
  LayerSpec dense{LayerKind::Dense, "classifier"};
  dense.in_features = kPlantedSide * kPlantedSide;
  dense.out_features = 4;
  const auto plain = [](LayerKind kind) {
    LayerSpec spec;
    spec.kind = kind;
    return spec;
  };
  m.layers = {conv, plain(LayerKind::Relu), plain(LayerKind::Flatten), dense, plain(LayerKind::Softmax)};
  return m;
}

std::vector<float> planted_weights()
{
  const std::size_t n = kPlantedSide * kPlantedSide;
  std::vector<float> w = {1.0F, 0.0F};  // conv weight, conv bias
  std::vector<float> dense(4 * n, 0.0F);
  for (std::size_t k = 0; k < 3; ++k) {
    const BoundingBox r = planted_region(k);
    for (std::size_t y = r.y_min; y < r.y_max; ++y) {
      for (std::size_t x = r.x_min; x < r.x_max; ++x) {
        dense[k * n + y * kPlantedSide + x] = 1.0F;
      }
    }
  }
  std::fill(dense.begin() + static_cast<std::ptrdiff_t>(3 * n), dense.end(), static_cast<float>(kEmptyWeight));
  w.insert(w.end(), dense.begin(), dense.end());
  w.insert(w.end(), {0.0F, 0.0F, 0.0F, static_cast<float>(kEmptyBias)});
  return w;
}

Model planted_model() { return Model::build(planted_manifest(), planted_weights()); }

ModelFiles write_model(const std::filesystem::path & dir, const ModelManifest & manifest, const std::vector<float> & weights)
{
  std::filesystem::create_directories(dir);
  ModelFiles files{dir / "model.json", dir / "model.weights"};
  std::ofstream(files.manifest) << manifest_to_json(manifest).dump(2) << "\n";
  write_weights(files.weights, weights);
  return files;
}

ModelFiles write_planted_model(const std::filesystem::path & dir)
{
  return write_model(dir, planted_manifest(), planted_weights());
}

Image square_image(std::size_t width, std::size_t height, const BoundingBox & square, std::uint32_t seed)
{
  std::mt19937 rng(seed);
  Image img(width, height, 1);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::uint32_t r = rng();
      const bool inside = x >= square.x_min && x < square.x_max && y >= square.y_min && y < square.y_max;
      if (inside) {
        img.at(x, y, 0) = static_cast<std::uint8_t>(200 + r % 56);
      } else if (r % 4 == 0) {
        img.at(x, y, 0) = static_cast<std::uint8_t>(1 + (r >> 8) % 2);
      }
    }
  }
  return img;
}

Image dots_image(std::size_t width, std::size_t height, std::size_t dot_rows, std::uint32_t seed)
{
  std::mt19937 rng(seed);
  Image img(width, height, 1);
  for (int i = 0; i < 24; ++i) {
    const std::size_t x = rng() % width;
    const std::size_t y = rng() % std::min(dot_rows, height);
    img.at(x, y, 0) = static_cast<std::uint8_t>(40 + rng() % 40);
  }
  return img;
}

Image trigger_image() { return square_image(kPlantedSide, kPlantedSide, planted_region(1), 7); }

std::string annotation_lines(const std::vector<AnnotatedSample> & samples, const std::filesystem::path & base_dir)
{
  std::ostringstream out;
  for (const AnnotatedSample & s : samples) {
    out << "{\"sample_id\": \"" << s.sample_id << "\", \"image\": \""
        << s.image.lexically_relative(base_dir).generic_string() << "\", \"true_label\": \"" << s.true_label
        << "\", \"odd_tag\": \"" << s.odd_tag << "\", \"boxes\": [";
    for (std::size_t i = 0; i < s.boxes.size(); ++i) {
      const BoundingBox & b = s.boxes[i];
      out << (i == 0 ? "" : ", ") << "[" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", " << b.y_max << "]";
    }
    out << "]}\n";
  }
  return out.str();
}

PlantedSuite write_planted_suite(const std::filesystem::path & dir)
{
  constexpr std::size_t side = 448;
  const std::filesystem::path images = dir / "images";
  std::filesystem::create_directories(images);

  // Original-resolution squares for the three planted regions (model region x2).
  const auto square = [](std::size_t k) {
    const BoundingBox r = planted_region(k);
    return BoundingBox{2 * r.x_min, 2 * r.y_min, 2 * r.x_max, 2 * r.y_max};
  };
  const auto grown = [](const BoundingBox & b, std::size_t margin) {
    return BoundingBox{b.x_min - margin, b.y_min - margin, b.x_max + margin, b.y_max + margin};
  };

  struct Spec
  {
    const char * id;
    const char * label;
    Image image;
    bool png;
    std::vector<BoundingBox> boxes;
    Status expected;
  };
  const BoundingBox inner0{40, 176, 136, 272};
  const BoundingBox inner2{312, 176, 408, 272};
  std::vector<Spec> specs;
  specs.push_back({"s01", "pedestrian", square_image(side, side, square(0), 101), false, {grown(square(0), 8)}, Status::Pass});
  specs.push_back({"s02", "pedestrian", square_image(side, side, inner0, 102), true, {square(0)}, Status::Pass});
  specs.push_back({"s03", "dog walker", square_image(side, side, square(1), 103), false, {grown(square(1), 8)}, Status::Pass});
  specs.push_back({"s04", "dog walker", square_image(side, side, square(1), 104), true, {grown(square(1), 4)}, Status::Pass});
  specs.push_back({"s05", "bicyclist", square_image(side, side, square(2), 105), false, {grown(square(2), 8)}, Status::Pass});
  specs.push_back({"s06", "bicyclist", square_image(side, side, inner2, 106), true, {square(2)}, Status::Pass});
  specs.push_back({"s07", "empty", dots_image(side, side, 100, 107), false, {}, Status::Pass});
  specs.push_back({"s08", "empty", dots_image(side, side, 100, 108), true, {}, Status::Pass});
  // Correctly classified, confident, but the annotated person is elsewhere.
  specs.push_back({"s09", "pedestrian", square_image(side, side, square(0), 109), false, {BoundingBox{32, 320, 144, 432}}, Status::Fail});
  specs.push_back({"s10", "bicyclist", square_image(side, side, square(2), 110), true, {grown(square(0), 8)}, Status::Fail});
  specs.push_back({"s11", "dog walker", square_image(side, side, square(1), 111), false, {BoundingBox{160, 160, 200, 288}}, Status::Fail});
  // Blank frame: every activation is zero.
  specs.push_back({"s12", "pedestrian", Image(side, side, 1, 0), true, {grown(square(0), 8)}, Status::Inconclusive});

  PlantedSuite suite;
  suite.dir = dir;
  suite.annotations = dir / "annotations.jsonl";
  suite.all_pass_annotations = dir / "all_pass.jsonl";
  std::vector<AnnotatedSample> passing;
  for (Spec & spec : specs) {
    const std::filesystem::path path = images / (std::string(spec.id) + (spec.png ? ".png" : ".ppm"));
    if (spec.png) {
      write_png(path, spec.image);
    } else {
      write_ppm(path, spec.image);
    }
    AnnotatedSample sample{spec.id, path, spec.label, "daytime", spec.boxes};
    suite.planted[spec.id] = spec.expected;
    if (spec.expected == Status::Pass) {
      passing.push_back(sample);
    }
    suite.samples.push_back(std::move(sample));
  }
  std::ofstream(suite.annotations) << annotation_lines(suite.samples, dir);
  std::ofstream(suite.all_pass_annotations) << annotation_lines(passing, dir);
  return suite;
}

std::filesystem::path scratch_dir(const std::string & name)
{
  const std::filesystem::path dir =
    std::filesystem::temp_directory_path() / ("camgate-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double uniform(std::mt19937_64 & rng, double lo, double hi)
{
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

Tensor random_tensor(std::mt19937_64 & rng, Shape shape, double lo, double hi)
{
  Tensor t(std::move(shape));
  for (double & v : t.data()) {
    v = uniform(rng, lo, hi);
  }
  return t;
}

namespace
{

Conv2dLayer random_conv(
  std::mt19937_64 & rng, std::size_t c_in, std::size_t c_out, std::size_t kernel, std::size_t stride,
  std::size_t padding)
{
  return {
    random_tensor(rng, {c_out, c_in, kernel, kernel}, -0.6, 0.6), random_tensor(rng, {c_out}, 0.2, 1.0), stride,
    padding};
}

DenseLayer random_dense(std::mt19937_64 & rng, std::size_t n, std::size_t m)
{
  return {random_tensor(rng, {m, n}, -1.0, 1.0), random_tensor(rng, {m}, -0.5, 0.5)};
}

std::size_t pick(std::mt19937_64 & rng, std::size_t lo, std::size_t hi) { return lo + rng() % (hi - lo + 1); }

}  // namespace

RandomNetwork random_network(std::mt19937_64 & rng, std::size_t max_channels)
{
  RandomNetwork net;
  net.classes = pick(rng, 2, 4);
  const std::size_t c_in = pick(rng, 1, max_channels);
  const std::size_t c1 = pick(rng, 1, 3);
  Shape shape;
  switch (rng() % 3) {
    case 0: {  // conv -> relu -> maxpool -> flatten -> dense
      const std::size_t side = 2 * pick(rng, 2, 4);
      shape = {c_in, side, side};
      net.layers.emplace_back(random_conv(rng, c_in, c1, 3, 1, 1));
      net.layers.emplace_back(ReluLayer{});
      net.layers.emplace_back(MaxPoolLayer{2, 2});
      net.layers.emplace_back(FlattenLayer{});
      net.layers.emplace_back(random_dense(rng, c1 * (side / 2) * (side / 2), net.classes));
      break;
    }
    case 1: {  // conv -> relu -> conv (stride 2) -> flatten -> dense
      const std::size_t side = 2 * pick(rng, 2, 3) + 1;
      const std::size_t c2 = pick(rng, 1, 3);
      shape = {c_in, side, side};
      net.layers.emplace_back(random_conv(rng, c_in, c1, 3, 1, 1));
      net.layers.emplace_back(ReluLayer{});
      net.layers.emplace_back(random_conv(rng, c1, c2, 3, 2, 1));
      net.layers.emplace_back(FlattenLayer{});
      const std::size_t out_side = (side - 1) / 2 + 1;
      net.layers.emplace_back(random_dense(rng, c2 * out_side * out_side, net.classes));
      break;
    }
    default: {  // conv (2x2, valid) -> conv -> relu -> flatten -> dense
      const std::size_t side = pick(rng, 5, 8);
      const std::size_t c2 = pick(rng, 1, 3);
      shape = {c_in, side, side};
      net.layers.emplace_back(random_conv(rng, c_in, c1, 2, 1, 0));
      net.layers.emplace_back(random_conv(rng, c1, c2, 3, 1, 1));
      net.layers.emplace_back(ReluLayer{});
      net.layers.emplace_back(FlattenLayer{});
      net.layers.emplace_back(random_dense(rng, c2 * (side - 1) * (side - 1), net.classes));
      break;
    }
  }
  if (rng() % 2 == 0) {
    net.layers.emplace_back(SoftmaxLayer{});
  }
  net.input = random_tensor(rng, shape, -1.0, 1.0);
  return net;
}

}  // namespace camgate::fixtures
