// Copyright 2026 The nzip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nzip/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "nzip/errors.hpp"
#include "nzip/weights_io.hpp"

namespace nzip {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Tensor image_to_tensor(const Image& image) {
  return Tensor({1, 3, image.height, image.width}, image.pixels);
}

Image tensor_to_image(const Tensor& t, std::size_t index) {
  if (t.rank() != 4 || t.size(1) != 3 || index >= t.size(0)) {
    throw DimensionError("tensor_to_image expects Nx3xHxW, got " + to_string(t.shape()));
  }
  Image img(t.size(3), t.size(2));
  const std::size_t n = img.pixels.size();
  std::copy_n(t.data().begin() + static_cast<std::ptrdiff_t>(index * n), n, img.pixels.begin());
  return img;
}

Tensor images_to_batch(std::span<const Image> images) {
  if (images.empty()) throw ContractError("images_to_batch: no images");
  const std::size_t w = images[0].width, h = images[0].height;
  std::vector<double> values;
  values.reserve(images.size() * 3 * w * h);
  for (const Image& img : images) {
    if (img.width != w || img.height != h) throw DimensionError("images_to_batch: size mismatch");
    values.insert(values.end(), img.pixels.begin(), img.pixels.end());
  }
  return Tensor({images.size(), 3, h, w}, std::move(values));
}

Image quantize_8bit(const Image& image) {
  Image out = image;
  for (double& v : out.pixels) v = to_byte(v) / 255.0;
  return out;
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + 3 * image.width * image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) out.push_back(to_byte(image.at(c, y, x)));
    }
  }
  return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip_space();
    std::size_t v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (++digits > 9) throw DecodeError("ppm: header value too large");
    }
    if (digits == 0) throw DecodeError("ppm: malformed header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw DecodeError("ppm: not a P6 file");
  pos = 2;
  const std::size_t w = number(), h = number(), maxval = number();
  if (maxval == 0 || maxval > 255) throw DecodeError("ppm: only 8-bit files are supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DecodeError("ppm: malformed header");
  ++pos;
  if (w == 0 || h == 0 || bytes.size() - pos < 3 * w * h) throw DecodeError("ppm: truncated pixel data");
  Image img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = bytes[pos++] / static_cast<double>(maxval);
    }
  }
  return img;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw DecodeError(std::string("png: ") + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw DecodeError("png: " + msg);
  }
  const std::size_t w = png.width, h = png.height;
  Image img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = raw[(y * w + x) * 3 + c] / 255.0;
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raw(image.width * image.height * 3);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) raw[(y * image.width + x) * 3 + c] = to_byte(image.at(c, y, x));
    }
  }
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw IoError(std::string("png: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw IoError(std::string("png: ") + png.message);
  }
  out.resize(size);
  return out;
}

Image read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes);
  return decode_ppm(bytes);
}

void write_image(const Image& image, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  write_file(path, ext == ".png" ? encode_png(image) : encode_ppm(image));
}

}  // namespace nzip
