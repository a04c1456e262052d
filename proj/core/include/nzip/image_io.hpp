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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nzip/tensor.hpp"

namespace nzip {

// Planar RGB image with samples in [0, 1]: pixels[(c * height + y) * width + x].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(3 * w * h, fill) {}

  double& at(std::size_t c, std::size_t y, std::size_t x) { return pixels[(c * height + y) * width + x]; }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return pixels[(c * height + y) * width + x];
  }
  bool operator==(const Image&) const = default;
};

// [1,3,H,W]
Tensor image_to_tensor(const Image& image);
// Takes batch item `index` of an [N,3,H,W] tensor.
Image tensor_to_image(const Tensor& t, std::size_t index = 0);
// Stacks images of identical size into [N,3,H,W].
Tensor images_to_batch(std::span<const Image> images);

// Samples are rounded to 8 bits on write.
std::vector<std::uint8_t> encode_ppm(const Image& image);
Image decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);

// Format picked from the file contents on read and from the extension on
// write (.png, otherwise PPM).
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);

// Rounds every sample to the 8-bit grid the file formats store.
Image quantize_8bit(const Image& image);

}  // namespace nzip
