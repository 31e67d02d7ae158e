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

#include "camgate/imaging.hpp"

#include "camgate/error.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <utility>

namespace camgate
{

Image::Image(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill)
: width(w), height(h), channels(c), pixels(w * h * c, fill)
{
}

std::uint8_t to_byte(double value)
{
  const double r = std::round(value);  // half away from zero
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

// ---------------------------------------------------------------------------
// Colour maps

ColorMap::ColorMap(std::vector<ColorStop> stops) : stops_(std::move(stops))
{
  if (stops_.size() < 2) {
    config_error("colour map needs at least two control points");
  }
  if (stops_.front().position != 0.0 || stops_.back().position != 1.0) {
    config_error("colour map control points must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < stops_.size(); ++i) {
    if (!(stops_[i].position > stops_[i - 1].position)) {
      config_error("colour map control positions must be strictly increasing");
    }
  }
}

ColorMap ColorMap::heat()
{
  return ColorMap({
    {0.00, {0, 0, 255}},
    {0.25, {0, 255, 255}},
    {0.50, {0, 255, 0}},
    {0.75, {255, 255, 0}},
    {1.00, {255, 0, 0}},
  });
}

ColorMap ColorMap::grayscale()
{
  return ColorMap({{0.0, {0, 0, 0}}, {1.0, {255, 255, 255}}});
}

ColorMap ColorMap::by_name(const std::string & name)
{
  if (name == "heat") {
    return heat();
  }
  if (name == "grayscale") {
    return grayscale();
  }
  config_error("unknown colour map '" + name + "' (expected heat or grayscale)");
}

Rgb ColorMap::map(double value) const
{
  const double v = std::clamp(value, 0.0, 1.0);
  std::size_t seg = 0;
  while (seg + 2 < stops_.size() && v >= stops_[seg + 1].position) {
    ++seg;
  }
  const ColorStop & lo = stops_[seg];
  const ColorStop & hi = stops_[seg + 1];
  const double t = (v - lo.position) / (hi.position - lo.position);
  Rgb out{};
  for (std::size_t c = 0; c < 3; ++c) {
    out[c] = to_byte(std::lerp(static_cast<double>(lo.color[c]), static_cast<double>(hi.color[c]), t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decoding and encoding

namespace
{

std::vector<std::uint8_t> read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    input_error("cannot open image '" + path.string() + "'");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PpmReader
{
public:
  PpmReader(const std::vector<std::uint8_t> & bytes, const std::string & name) : bytes_(bytes), name_(name) {}

  std::size_t header_number()
  {
    skip_space_and_comments();
    std::size_t value = 0;
    bool any = false;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]) != 0) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > 1'000'000'000) {
        fail("header value too large");
      }
      ++pos_;
      any = true;
    }
    if (!any) {
      fail("malformed header");
    }
    return value;
  }

  void expect_magic()
  {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '6') {
      fail("not a binary PPM (P6)");
    }
    pos_ = 2;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset()
  {
    if (pos_ >= bytes_.size() || std::isspace(bytes_[pos_]) == 0) {
      fail("malformed header");
    }
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string & what) const
  {
    input_error("image '" + name_ + "': " + what);
  }

private:
  void skip_space_and_comments()
  {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_]) != 0) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
          ++pos_;
        }
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t> & bytes_;
  const std::string & name_;
  std::size_t pos_ = 0;
};

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace

Image decode_ppm(const std::vector<std::uint8_t> & bytes, const std::string & name)
{
  PpmReader reader(bytes, name);
  reader.expect_magic();
  const std::size_t width = reader.header_number();
  const std::size_t height = reader.header_number();
  const std::size_t maxval = reader.header_number();
  if (width == 0 || height == 0) {
    reader.fail("zero image dimension");
  }
  if (maxval != 255) {
    reader.fail("unsupported maxval " + std::to_string(maxval) + " (only 255)");
  }
  const std::size_t offset = reader.raster_offset();
  const std::size_t expected = width * height * 3;
  if (bytes.size() < offset + expected) {
    reader.fail(
      "truncated raster: " + std::to_string(bytes.size() - std::min(bytes.size(), offset)) +
      " of " + std::to_string(expected) + " bytes");
  }
  Image image(width, height, 3);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(offset), expected, image.pixels.begin());
  return image;
}

Image decode_png(const std::vector<std::uint8_t> & bytes, const std::string & name)
{
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()) == 0) {
    const std::string why = png.message;
    png_image_free(&png);
    input_error("image '" + name + "': " + why);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0U;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image image(png.width, png.height, color ? 3 : 1);
  if (png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr) == 0) {
    const std::string why = png.message;
    png_image_free(&png);
    input_error("image '" + name + "': " + why);
  }
  return image;
}

Image decode(const std::filesystem::path & path)
{
  const std::vector<std::uint8_t> bytes = read_file(path);
  const std::string name = path.string();
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin())) {
    return decode_png(bytes, name);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    return decode_ppm(bytes, name);
  }
  input_error("image '" + name + "': unsupported format (expected PNG or binary PPM)");
}

void write_png(const std::filesystem::path & path, const Image & image)
{
  if (image.channels != 1 && image.channels != 3) {
    usage_error("PNG output supports 1 or 3 channels");
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (png_image_write_to_file(&png, path.string().c_str(), 0, image.pixels.data(), 0, nullptr) == 0) {
    const std::string why = png.message;
    png_image_free(&png);
    input_error("cannot write '" + path.string() + "': " + why);
  }
}

void write_ppm(const std::filesystem::path & path, const Image & image)
{
  const Image rgb = to_rgb(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    input_error("cannot write '" + path.string() + "'");
  }
  out << "P6\n" << rgb.width << " " << rgb.height << "\n255\n";
  out.write(reinterpret_cast<const char *>(rgb.pixels.data()), static_cast<std::streamsize>(rgb.pixels.size()));
}

// ---------------------------------------------------------------------------
// Resampling

namespace
{

struct Tap
{
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<Tap> align_corner_taps(std::size_t in, std::size_t out)
{
  std::vector<Tap> taps(out);
  for (std::size_t d = 0; d < out; ++d) {
    if (in == 1 || out == 1) {
      taps[d] = {0, 0, 0.0};
      continue;
    }
    const double src = static_cast<double>(d) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
    const auto lo = std::min(static_cast<std::size_t>(std::floor(src)), in - 1);
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[d] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

template <class Sample>
double bilinear(const Sample & sample, const Tap & tx, const Tap & ty)
{
  const double top = std::lerp(sample(tx.lo, ty.lo), sample(tx.hi, ty.lo), tx.frac);
  const double bottom = std::lerp(sample(tx.lo, ty.hi), sample(tx.hi, ty.hi), tx.frac);
  return std::lerp(top, bottom, ty.frac);
}

}  // namespace

Image resize_bilinear(const Image & image, std::size_t out_w, std::size_t out_h)
{
  if (out_w == 0 || out_h == 0) {
    usage_error("resize target must be at least 1x1");
  }
  const auto tx = align_corner_taps(image.width, out_w);
  const auto ty = align_corner_taps(image.height, out_h);
  Image out(out_w, out_h, image.channels);
  for (std::size_t c = 0; c < image.channels; ++c) {
    const auto sample = [&](std::size_t x, std::size_t y) { return static_cast<double>(image.at(x, y, c)); };
    for (std::size_t y = 0; y < out_h; ++y) {
      for (std::size_t x = 0; x < out_w; ++x) {
        out.at(x, y, c) = to_byte(bilinear(sample, tx[x], ty[y]));
      }
    }
  }
  return out;
}

ScalarMap resize_bilinear(const ScalarMap & map, std::size_t out_w, std::size_t out_h)
{
  if (out_w == 0 || out_h == 0) {
    usage_error("resize target must be at least 1x1");
  }
  const auto tx = align_corner_taps(map.width, out_w);
  const auto ty = align_corner_taps(map.height, out_h);
  const auto sample = [&](std::size_t x, std::size_t y) { return map.at(x, y); };
  ScalarMap out(out_w, out_h);
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      out.at(x, y) = bilinear(sample, tx[x], ty[y]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conversion, colouring, blending

Image to_rgb(const Image & image)
{
  if (image.channels == 3) {
    return image;
  }
  Image out(image.width, image.height, 3);
  for (std::size_t i = 0; i < image.width * image.height; ++i) {
    std::fill_n(out.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i), 3, image.pixels[i]);
  }
  return out;
}

Image to_grayscale(const Image & image)
{
  if (image.channels == 1) {
    return image;
  }
  Image out(image.width, image.height, 1);
  for (std::size_t i = 0; i < image.width * image.height; ++i) {
    const unsigned luma = 299U * image.pixels[3 * i] + 587U * image.pixels[3 * i + 1] + 114U * image.pixels[3 * i + 2];
    out.pixels[i] = static_cast<std::uint8_t>((luma + 500U) / 1000U);
  }
  return out;
}

Image colorize(const ScalarMap & map, const ColorMap & cmap)
{
  Image out(map.width, map.height, 3);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const Rgb rgb = cmap.map(map.values[i]);
    std::copy(rgb.begin(), rgb.end(), out.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return out;
}

Image superimpose(const Image & base, const Image & heat, double alpha)
{
  if (base.width != heat.width || base.height != heat.height || base.channels != heat.channels) {
    input_error(
      "overlay size mismatch: base " + std::to_string(base.width) + "x" + std::to_string(base.height) +
      "x" + std::to_string(base.channels) + ", heat " + std::to_string(heat.width) + "x" +
      std::to_string(heat.height) + "x" + std::to_string(heat.channels));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    input_error("overlay alpha must lie in [0,1]");
  }
  Image out(base.width, base.height, base.channels);
  for (std::size_t i = 0; i < base.pixels.size(); ++i) {
    out.pixels[i] = to_byte((1.0 - alpha) * base.pixels[i] + alpha * heat.pixels[i]);
  }
  return out;
}

Tensor image_to_tensor(const Image & image, const Shape & input_shape, const Normalization * normalization)
{
  if (input_shape.size() != 3 || (input_shape[0] != 1 && input_shape[0] != 3)) {
    config_error("model input shape must be [1|3,H,W], got " + shape_to_string(input_shape));
  }
  const std::size_t channels = input_shape[0];
  const Image converted = channels == 3 ? to_rgb(image) : to_grayscale(image);
  const Image sized = (converted.width == input_shape[2] && converted.height == input_shape[1])
                        ? converted
                        : resize_bilinear(converted, input_shape[2], input_shape[1]);
  Tensor out(input_shape);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < sized.height; ++y) {
      for (std::size_t x = 0; x < sized.width; ++x) {
        double v = sized.at(x, y, c) / 255.0;
        if (normalization != nullptr) {
          v = (v - normalization->mean[c]) / normalization->std[c];
        }
        out.at(c, y, x) = v;
      }
    }
  }
  return out;
}

std::string sanitize_filename_part(const std::string & part)
{
  std::string out = part;
  for (char & ch : out) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u) == 0 && ch != '_' && ch != '-' && ch != '.') {
      ch = '_';
    }
  }
  return out;
}

std::string heatmap_filename(const std::string & sample_id, const std::string & class_label)
{
  return sanitize_filename_part(sample_id) + "." + sanitize_filename_part(class_label) + ".heatmap.png";
}

}  // namespace camgate
