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
#include <span>
#include <vector>

#include "nzip/codec_model.hpp"
#include "nzip/entropy_model.hpp"
#include "nzip/image_io.hpp"

namespace nzip {

// .nzip container, little-endian:
//   magic "NZIP" | version u16 | orig_w u32 | orig_h u32 | padded_w u32 | padded_h u32 |
//   latent C,h,w u32 x3 | hyper C,h,w u32 x3 | model_id 16 bytes |
//   hyper_payload_len u32 | hyper payload | latent_payload_len u32 | latent payload
inline constexpr std::uint16_t kContainerVersion = 1;

struct CompressedImage {
  std::uint32_t orig_width = 0;
  std::uint32_t orig_height = 0;
  std::uint32_t padded_width = 0;
  std::uint32_t padded_height = 0;
  std::uint32_t latent_dims[3] = {0, 0, 0};  // C_z, h_z, w_z
  std::uint32_t hyper_dims[3] = {0, 0, 0};   // C_w, h_w, w_w
  ModelDigest model_id{};
  std::vector<std::uint8_t> hyper_payload;
  std::vector<std::uint8_t> latent_payload;

  std::size_t payload_bytes() const { return hyper_payload.size() + latent_payload.size(); }
  // 8 * payload bytes / original pixel count.
  double bits_per_pixel() const;
};

std::vector<std::uint8_t> serialize_container(const CompressedImage& c);
// Rejects bad magic, unknown versions, inconsistent dimensions and any
// section length that disagrees with the data actually present.
CompressedImage parse_container(std::span<const std::uint8_t> bytes);

struct CompressReport {
  double bits_per_pixel = 0.0;
  double estimated_bits = 0.0;  // model rate of the coded symbols
  std::size_t clamped_elements = 0;
  double wall_seconds = 0.0;
  QuantizedLatent latent;
  QuantizedLatent hyper_latent;
};

struct DecodedLatents {
  QuantizedLatent hyper_latent;
  QuantizedLatent latent;
};

// Replicates edge pixels so both extents become multiples of `multiple`.
Image pad_edge(const Image& image, std::size_t multiple = CodecConfig::kDownsample);
Image crop_image(const Image& image, std::size_t width, std::size_t height);

CompressedImage compress(const Image& image, CodecModel& model, CompressReport* report = nullptr,
                         const CdfOptions& options = {});

// Hyper-latent first, then the latent under tables rebuilt from it.
DecodedLatents decode_latents(const CompressedImage& c, CodecModel& model,
                              const CdfOptions& options = {});

Image decompress(const CompressedImage& c, CodecModel& model, const CdfOptions& options = {});

// Quantized latent [1, C_z, padded_h/16, padded_w/16] without running the image decoder.
QuantizedLatent extract_latent(const CompressedImage& c, CodecModel& model,
                               const CdfOptions& options = {});

}  // namespace nzip
