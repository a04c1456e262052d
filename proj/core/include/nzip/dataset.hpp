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

#include "nzip/image_io.hpp"

namespace nzip {

struct SyntheticSample {
  Image image;
  std::int32_t label = 0;
};

// Labeled texture corpus. Each image carries one rectangle of a
// class-specific texture family (stripes, checks, dots, rings, ...) with a
// class-tinted palette over a random smooth background. Labels are balanced
// (sample i has label i mod K) and the texture covers at least a quarter of
// the image. Identical seeds give identical samples.
std::vector<SyntheticSample> make_synthetic_dataset(std::uint64_t seed, std::size_t num_classes,
                                                    std::size_t count, std::size_t size);

// Flat gray image, the easiest input for any codec.
Image flat_image(std::size_t width, std::size_t height, double level);

std::vector<std::int32_t> labels_of(std::span<const SyntheticSample> samples);
std::vector<Image> images_of(std::span<const SyntheticSample> samples);

}  // namespace nzip
