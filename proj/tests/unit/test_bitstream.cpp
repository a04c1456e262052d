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

#include <cmath>

#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "nzip/bitstream.hpp"
#include "nzip/dataset.hpp"
#include "nzip/errors.hpp"
#include "nzip/image_io.hpp"
#include "nzip/ops.hpp"
#include "nzip/weights_io.hpp"
#include "test_support.hpp"

using namespace nzip;
using namespace nzip::testing;

namespace {

CodecModel& tiny_model() {
  static CodecModel model = load_codec(data_dir() / "tiny_codec.nzwt");
  return model;
}

Image random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h);
  for (double& v : img.pixels) v = rng.uniform();
  return img;
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (std::uint32_t(b[at + 3]) << 24);
}

}  // namespace

TEST_SUITE("bitstream") {

TEST_CASE("container fields survive serialization") {
  CompressedImage c;
  c.orig_width = 30;
  c.orig_height = 17;
  c.padded_width = 32;
  c.padded_height = 32;
  c.latent_dims[0] = 8, c.latent_dims[1] = 2, c.latent_dims[2] = 2;
  c.hyper_dims[0] = 8, c.hyper_dims[1] = 1, c.hyper_dims[2] = 1;
  for (std::size_t i = 0; i < c.model_id.size(); ++i) c.model_id[i] = static_cast<std::uint8_t>(i * 7);
  c.hyper_payload = {1, 2, 3};
  c.latent_payload = {9, 8, 7, 6, 5};
  const auto bytes = serialize_container(c);
  REQUIRE(bytes.size() == 4 + 2 + 16 + 24 + 16 + 4 + 3 + 4 + 5);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "NZIP");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(read_u32(bytes, 6) == 30);
  CHECK(read_u32(bytes, 10) == 17);
  const CompressedImage back = parse_container(bytes);
  CHECK(back.orig_width == 30);
  CHECK(back.orig_height == 17);
  CHECK(back.model_id == c.model_id);
  CHECK(back.hyper_payload == c.hyper_payload);
  CHECK(back.latent_payload == c.latent_payload);
  CHECK(c.bits_per_pixel() == doctest::Approx(8.0 * 8 / (30 * 17)).epsilon(1e-15));

  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    CHECK_THROWS_AS(parse_container(b), DecodeError);
  }
  SUBCASE("unknown version") {
    auto b = bytes;
    b[4] = 2;
    CHECK_THROWS_AS(parse_container(b), VersionError);
  }
  SUBCASE("truncated anywhere") {
    for (std::size_t n = 0; n < bytes.size(); ++n) {
      std::vector<std::uint8_t> b(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
      CHECK_THROWS_AS(parse_container(b), DecodeError);
    }
  }
  SUBCASE("trailing bytes") {
    auto b = bytes;
    b.push_back(0);
    CHECK_THROWS_AS(parse_container(b), DecodeError);
  }
  SUBCASE("inconsistent dimensions") {
    auto b = bytes;
    b[14] = 31;  // padded width not a multiple of 16
    CHECK_THROWS_AS(parse_container(b), DecodeError);
    b = bytes;
    b[6] = 64;  // original wider than padded
    CHECK_THROWS_AS(parse_container(b), DecodeError);
    b = bytes;
    b[26] = 3;  // latent height disagrees with padded height / 16
    CHECK_THROWS_AS(parse_container(b), DecodeError);
  }
}

TEST_CASE("edge padding replicates the border") {
  Image img = random_image(5, 3, 1);
  Image p = pad_edge(img);
  CHECK(p.width == 16);
  CHECK(p.height == 16);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) CHECK(p.at(c, y, x) == img.at(c, std::min<std::size_t>(y, 2), std::min<std::size_t>(x, 4)));
  CHECK(crop_image(p, 5, 3) == img);
  CHECK(pad_edge(random_image(32, 16, 2)).width == 32);
}

TEST_CASE("compress and decompress an odd-sized image") {
  CodecModel& model = tiny_model();
  const Image img = random_image(37, 21, 3);
  CompressReport report;
  const CompressedImage c = compress(img, model, &report);
  CHECK(c.padded_width == 48);
  CHECK(c.padded_height == 32);
  CHECK(report.bits_per_pixel == 8.0 * double(c.payload_bytes()) / (37.0 * 21.0));
  const Image back = decompress(parse_container(serialize_container(c)), model);
  CHECK(back.width == 37);
  CHECK(back.height == 21);
  for (double v : back.pixels) CHECK((v >= 0.0 && v <= 1.0));

  const DecodedLatents d = decode_latents(c, model);
  CHECK(d.latent == report.latent);
  CHECK(d.hyper_latent == report.hyper_latent);
  const QuantizedLatent e = extract_latent(c, model);
  CHECK(e == report.latent);
  CHECK(e.shape == Shape{1, 8, 2, 3});
}

TEST_CASE("payload size agrees with the model rate at the rounded latents") {
  CodecModel& model = tiny_model();
  for (std::uint64_t seed : {5u, 6u}) {
    const Image img = make_synthetic_dataset(seed, 4, 1, 64)[0].image;
    CompressReport report;
    const CompressedImage c = compress(img, model, &report);
    NoGradGuard no_grad;
    const Tensor w = report.hyper_latent.to_tensor();
    const Tensor z = report.latent.to_tensor();
    const double model_bits = rate_bits(z, model.hyper_decode(w, z.shape())).item() +
                              hyper_rate_bits(w, model.hyper_prior()).item();
    const double coded = 8.0 * double(c.payload_bytes());
    CAPTURE(model_bits);
    CAPTURE(coded);
    CHECK(std::abs(coded - model_bits) <= 0.01 * model_bits + 128.0);
    CHECK(report.estimated_bits == doctest::Approx(model_bits).epsilon(1e-12));
  }
}

TEST_CASE("a different model is rejected by digest") {
  CodecModel other(CodecConfig::scaled(8), 99);
  const CompressedImage c = compress(random_image(16, 16, 4), tiny_model());
  CHECK_THROWS_AS(decompress(c, other), ModelMismatchError);
  CHECK_THROWS_AS(extract_latent(c, other), ModelMismatchError);
}

TEST_CASE("corrupted payload bytes never crash") {
  CodecModel& model = tiny_model();
  const auto bytes = serialize_container(compress(make_synthetic_dataset(8, 4, 1, 32)[0].image, model));
  const std::size_t header = 4 + 2 + 16 + 24 + 16;
  std::size_t errors = 0, images = 0;
  for (std::size_t at = header; at < bytes.size(); ++at) {
    for (std::uint8_t flip : {0x01, 0x80, 0xFF}) {
      auto b = bytes;
      b[at] ^= flip;
      try {
        const Image img = decompress(parse_container(b), model);
        CHECK(img.width == 32);
        ++images;
      } catch (const DecodeError&) {
        ++errors;
      }
    }
  }
  CHECK(errors + images == 3 * (bytes.size() - header));
}

TEST_CASE("golden file decodes to the recorded image") {
  CodecModel& model = tiny_model();
  const auto g = [] {
    std::ifstream in(data_dir() / "golden.json");
    return nlohmann::json::parse(in);
  }();
  const auto committed = read_file(data_dir() / "golden.nzip");
  const Image img = decompress(parse_container(committed), model);
  CHECK(to_hex(digest_bytes(encode_ppm(img))) == g["container"]["decoded_ppm_digest"].get<std::string>());
  // Re-encoding the committed input reproduces the committed bytes.
  const Image input = read_image(data_dir() / "golden_input.ppm");
  CHECK(serialize_container(compress(input, model)) == committed);
}

}  // TEST_SUITE
