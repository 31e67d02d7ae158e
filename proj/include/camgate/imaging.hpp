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

// Image decoding, bilinear resizing, colour mapping and overlay blending.
//
// Conventions, fixed for reproducibility:
//   * bilinear resizing uses the align-corners mapping src = dst * (in - 1) / (out - 1)
//     and clamps at the edges;
//   * every conversion from a real value to an 8-bit channel rounds half away
//     from zero and then clamps to [0, 255];
//   * pixels become model inputs as pixel / 255, optionally followed by
//     (x - mean[c]) / std[c] per channel.

#include "camgate/tensor.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace camgate
{

struct Image
{
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;  // 1 (grey) or 3 (RGB)
  std::vector<std::uint8_t> pixels;  // row-major, interleaved channels

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0);

  std::uint8_t & at(std::size_t x, std::size_t y, std::size_t c)
  {
    return pixels[(y * width + x) * channels + c];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const
  {
    return pixels[(y * width + x) * channels + c];
  }

  bool operator==(const Image &) const = default;
};

/// Single-channel real-valued grid, e.g. a heatmap.
struct ScalarMap
{
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major

  ScalarMap() = default;
  ScalarMap(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

  double & at(std::size_t x, std::size_t y) { return values[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }

  bool operator==(const ScalarMap &) const = default;
};

using Rgb = std::array<std::uint8_t, 3>;

struct ColorStop
{
  double position;
  Rgb color;
};

class ColorMap
{
public:
  /// Throws a configuration error unless positions strictly increase from 0 to 1.
  explicit ColorMap(std::vector<ColorStop> stops);

  /// Blue, cyan, green, yellow, red at 0, 0.25, 0.5, 0.75, 1.
  static ColorMap heat();
  /// Black to white.
  static ColorMap grayscale();
  /// Looks up "heat" or "grayscale".
  static ColorMap by_name(const std::string & name);

  [[nodiscard]] Rgb map(double value) const;
  [[nodiscard]] const std::vector<ColorStop> & stops() const noexcept { return stops_; }

private:
  std::vector<ColorStop> stops_;
};

struct Normalization
{
  std::vector<double> mean;
  std::vector<double> std;

  bool operator==(const Normalization &) const = default;
};

/// Rounds half away from zero and clamps to [0, 255].
std::uint8_t to_byte(double value);

/// Decodes PNG or binary PPM (P6), dispatching on the file signature.
Image decode(const std::filesystem::path & path);
Image decode_ppm(const std::vector<std::uint8_t> & bytes, const std::string & name);
Image decode_png(const std::vector<std::uint8_t> & bytes, const std::string & name);

void write_png(const std::filesystem::path & path, const Image & image);
void write_ppm(const std::filesystem::path & path, const Image & image);

Image resize_bilinear(const Image & image, std::size_t out_w, std::size_t out_h);
ScalarMap resize_bilinear(const ScalarMap & map, std::size_t out_w, std::size_t out_h);

Image to_rgb(const Image & image);
/// Luma with integer weights (299 R + 587 G + 114 B) / 1000, rounded.
Image to_grayscale(const Image & image);

/// Maps each value (expected in [0,1], clamped otherwise) through the colour map.
Image colorize(const ScalarMap & map, const ColorMap & cmap);

/// out = round((1 - alpha) * base + alpha * heat) per channel.
Image superimpose(const Image & base, const Image & heat, double alpha);

/// Converts to a [C,H,W] model input: channel conversion, resize to H x W,
/// pixel / 255, then optional per-channel standardization.
Tensor image_to_tensor(
  const Image & image, const Shape & input_shape, const Normalization * normalization = nullptr);

/// `<sample_id>.<class>.heatmap.png`, with characters outside [A-Za-z0-9_-.] replaced by '_'.
std::string heatmap_filename(const std::string & sample_id, const std::string & class_label);
std::string sanitize_filename_part(const std::string & part);

}  // namespace camgate
