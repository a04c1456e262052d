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

#include <filesystem>

#include "doctest.h"
#include "nzip/errors.hpp"
#include "nzip/image_io.hpp"
#include "test_support.hpp"

using namespace nzip;
using namespace nzip::testing;

namespace {

Image random_8bit(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h);
  for (double& v : img.pixels) v = double(rng.below(256)) / 255.0;
  return img;
}

}  // namespace

TEST_SUITE("image_io") {

TEST_CASE("PPM and PNG round-trip 8-bit images exactly") {
  const Image img = random_8bit(13, 7, 1);
  CHECK(decode_ppm(encode_ppm(img)) == img);
  CHECK(decode_png(encode_png(img)) == img);
  CHECK(quantize_8bit(img) == img);
}

TEST_CASE("PPM header layout") {
  const auto bytes = encode_ppm(Image(2, 1, 1.0));
  const std::string head(bytes.begin(), bytes.begin() + 2);
  CHECK(head == "P6");
  CHECK(bytes.size() == std::string("P6\n2 1\n255\n").size() + 6);
  CHECK(bytes.back() == 255);
}

TEST_CASE("malformed files are decode errors") {
  std::vector<std::uint8_t> junk{'P', '6', '\n', '4', ' ', '4', '\n', '2', '5', '5', '\n', 1, 2};
  CHECK_THROWS_AS(decode_ppm(junk), DecodeError);
  CHECK_THROWS_AS(decode_png(junk), DecodeError);
  std::vector<std::uint8_t> empty;
  CHECK_THROWS_AS(decode_ppm(empty), DecodeError);
}

TEST_CASE("files dispatch on content and extension") {
  const auto dir = std::filesystem::temp_directory_path() / "nzip_image_io_test";
  std::filesystem::create_directories(dir);
  const Image img = random_8bit(16, 9, 2);
  write_image(img, dir / "a.png");
  write_image(img, dir / "a.ppm");
  CHECK(read_image(dir / "a.png") == img);
  CHECK(read_image(dir / "a.ppm") == img);
  CHECK_THROWS_AS(read_image(dir / "missing.ppm"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("tensor conversion keeps the planar layout") {
  const Image img = random_8bit(4, 3, 3);
  const Tensor t = image_to_tensor(img);
  CHECK(t.shape() == Shape{1, 3, 3, 4});
  CHECK(t[(2 * 3 + 1) * 4 + 3] == img.at(2, 1, 3));
  CHECK(tensor_to_image(t) == img);
  std::vector<Image> two{img, img};
  CHECK(images_to_batch(two).shape() == Shape{2, 3, 3, 4});
}

}  // TEST_SUITE
