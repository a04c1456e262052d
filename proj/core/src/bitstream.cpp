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

#include "nzip/bitstream.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "nzip/byte_io.hpp"
#include "nzip/errors.hpp"
#include "nzip/range_coder.hpp"
#include "nzip/weights_io.hpp"

namespace nzip {

namespace {

constexpr std::uint32_t kMaxExtent = 1u << 16;

// Per-element mean/scale for a hyper-latent of `dims` under the channel prior.
CdfTable hyper_tables(CodecModel& model, const std::uint32_t dims[3], const CdfOptions& options) {
  const GaussianParams prior = model.hyper_prior();
  const std::size_t plane = static_cast<std::size_t>(dims[1]) * dims[2];
  std::vector<double> mu, sigma;
  mu.reserve(dims[0] * plane);
  sigma.reserve(dims[0] * plane);
  for (std::size_t c = 0; c < dims[0]; ++c) {
    mu.insert(mu.end(), plane, prior.mu.data()[c]);
    sigma.insert(sigma.end(), plane, prior.sigma.data()[c]);
  }
  return build_cdf_tables(mu, sigma, options);
}

std::size_t clamp_into(std::vector<std::int32_t>& values, const CdfTable& tables) {
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::int32_t c = tables.clamp(i, values[i]);
    clamped += c != values[i];
    values[i] = c;
  }
  return clamped;
}

void check_model(const CompressedImage& c, CodecModel& model) {
  if (c.model_id != model.digest()) {
    throw ModelMismatchError("file was compressed with model " + to_hex(c.model_id) +
                             ", loaded model is " + to_hex(model.digest()));
  }
  const CodecConfig& cfg = model.config();
  if (c.latent_dims[0] != cfg.latent_channels || c.hyper_dims[0] != cfg.hyper_channels) {
    throw ModelMismatchError("container channel counts do not match the model");
  }
}

}  // namespace

double CompressedImage::bits_per_pixel() const {
  const double pixels = static_cast<double>(orig_width) * static_cast<double>(orig_height);
  return pixels > 0.0 ? 8.0 * static_cast<double>(payload_bytes()) / pixels : 0.0;
}

std::vector<std::uint8_t> serialize_container(const CompressedImage& c) {
  ByteWriter w;
  w.bytes(std::string_view("NZIP"));
  w.u16(kContainerVersion);
  w.u32(c.orig_width);
  w.u32(c.orig_height);
  w.u32(c.padded_width);
  w.u32(c.padded_height);
  for (std::uint32_t d : c.latent_dims) w.u32(d);
  for (std::uint32_t d : c.hyper_dims) w.u32(d);
  w.bytes(c.model_id);
  w.u32(static_cast<std::uint32_t>(c.hyper_payload.size()));
  w.bytes(c.hyper_payload);
  w.u32(static_cast<std::uint32_t>(c.latent_payload.size()));
  w.bytes(c.latent_payload);
  return w.take();
}

CompressedImage parse_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.string(4) != "NZIP") throw DecodeError("not an nzip file (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kContainerVersion) {
    throw VersionError("unsupported nzip version " + std::to_string(version));
  }
  CompressedImage c;
  c.orig_width = r.u32();
  c.orig_height = r.u32();
  c.padded_width = r.u32();
  c.padded_height = r.u32();
  for (std::uint32_t& d : c.latent_dims) d = r.u32();
  for (std::uint32_t& d : c.hyper_dims) d = r.u32();
  auto id = r.bytes(c.model_id.size());
  std::copy(id.begin(), id.end(), c.model_id.begin());

  const std::uint32_t k = CodecConfig::kDownsample;
  auto padded_ok = [k](std::uint32_t orig, std::uint32_t padded) {
    return orig > 0 && orig <= kMaxExtent && padded % k == 0 && padded >= orig && padded < orig + k;
  };
  if (!padded_ok(c.orig_width, c.padded_width) || !padded_ok(c.orig_height, c.padded_height)) {
    throw DecodeError("nzip header: inconsistent image dimensions");
  }
  if (c.latent_dims[0] == 0 || c.latent_dims[0] > 4096 || c.latent_dims[1] != c.padded_height / k ||
      c.latent_dims[2] != c.padded_width / k) {
    throw DecodeError("nzip header: latent dimensions disagree with the padded image size");
  }
  if (c.hyper_dims[0] == 0 || c.hyper_dims[0] > 4096 ||
      c.hyper_dims[1] != CodecModel::hyper_extent(c.latent_dims[1]) ||
      c.hyper_dims[2] != CodecModel::hyper_extent(c.latent_dims[2])) {
    throw DecodeError("nzip header: hyper-latent dimensions disagree with the latent");
  }
  const std::uint32_t hyper_len = r.u32();
  if (hyper_len > r.remaining()) throw DecodeError("nzip: hyper payload truncated");
  auto hp = r.bytes(hyper_len);
  c.hyper_payload.assign(hp.begin(), hp.end());
  const std::uint32_t latent_len = r.u32();
  if (latent_len != r.remaining()) {
    throw DecodeError("nzip: latent payload length " + std::to_string(latent_len) + " but " +
                      std::to_string(r.remaining()) + " bytes remain");
  }
  auto lp = r.bytes(latent_len);
  c.latent_payload.assign(lp.begin(), lp.end());
  return c;
}

Image pad_edge(const Image& image, std::size_t multiple) {
  if (image.width == 0 || image.height == 0) throw DimensionError("pad_edge: empty image");
  const std::size_t pw = (image.width + multiple - 1) / multiple * multiple;
  const std::size_t ph = (image.height + multiple - 1) / multiple * multiple;
  if (pw == image.width && ph == image.height) return image;
  Image out(pw, ph);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < ph; ++y) {
      const std::size_t sy = std::min(y, image.height - 1);
      for (std::size_t x = 0; x < pw; ++x) out.at(c, y, x) = image.at(c, sy, std::min(x, image.width - 1));
    }
  }
  return out;
}

Image crop_image(const Image& image, std::size_t width, std::size_t height) {
  if (width > image.width || height > image.height) throw DimensionError("crop_image: window too large");
  Image out(width, height);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) out.at(c, y, x) = image.at(c, y, x);
    }
  }
  return out;
}

CompressedImage compress(const Image& image, CodecModel& model, CompressReport* report,
                         const CdfOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (image.width == 0 || image.height == 0 || image.pixels.size() != 3 * image.width * image.height) {
    throw DimensionError("compress: invalid image");
  }
  if (image.width > kMaxExtent || image.height > kMaxExtent) {
    throw DimensionError("compress: image larger than 65536 pixels per side");
  }
  NoGradGuard no_grad;
  const Image padded = pad_edge(image);
  const Tensor z = model.encode_latent(image_to_tensor(padded));
  const Tensor w = model.hyper_encode(z);

  CompressedImage c;
  c.orig_width = static_cast<std::uint32_t>(image.width);
  c.orig_height = static_cast<std::uint32_t>(image.height);
  c.padded_width = static_cast<std::uint32_t>(padded.width);
  c.padded_height = static_cast<std::uint32_t>(padded.height);
  for (int i = 0; i < 3; ++i) {
    c.latent_dims[i] = static_cast<std::uint32_t>(z.size(static_cast<std::size_t>(i) + 1));
    c.hyper_dims[i] = static_cast<std::uint32_t>(w.size(static_cast<std::size_t>(i) + 1));
  }
  c.model_id = model.digest();

  QuantizedLatent what = quantize_round(w);
  const CdfTable wt = hyper_tables(model, c.hyper_dims, options);
  std::size_t clamped = clamp_into(what.values, wt);
  c.hyper_payload = encode_symbols(what.values, wt);

  const Tensor what_t = what.to_tensor();
  const GaussianParams params = model.hyper_decode(what_t, z.shape());
  const CdfTable zt = build_cdf_tables(params, options);
  QuantizedLatent zhat = quantize_round(z);
  clamped += clamp_into(zhat.values, zt);
  c.latent_payload = encode_symbols(zhat.values, zt);

  if (report) {
    report->bits_per_pixel = c.bits_per_pixel();
    report->estimated_bits =
        rate_bits(zhat.to_tensor(), params).item() + hyper_rate_bits(what_t, model.hyper_prior()).item();
    report->clamped_elements = clamped;
    report->latent = std::move(zhat);
    report->hyper_latent = std::move(what);
    report->wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return c;
}

DecodedLatents decode_latents(const CompressedImage& c, CodecModel& model, const CdfOptions& options) {
  check_model(c, model);
  NoGradGuard no_grad;
  DecodedLatents out;
  out.hyper_latent.shape = {1, c.hyper_dims[0], c.hyper_dims[1], c.hyper_dims[2]};
  const CdfTable wt = hyper_tables(model, c.hyper_dims, options);
  out.hyper_latent.values = decode_symbols(c.hyper_payload, wt, wt.size());

  out.latent.shape = {1, c.latent_dims[0], c.latent_dims[1], c.latent_dims[2]};
  const GaussianParams params = model.hyper_decode(out.hyper_latent.to_tensor(), out.latent.shape);
  const CdfTable zt = build_cdf_tables(params, options);
  out.latent.values = decode_symbols(c.latent_payload, zt, zt.size());
  return out;
}

Image decompress(const CompressedImage& c, CodecModel& model, const CdfOptions& options) {
  const DecodedLatents latents = decode_latents(c, model, options);
  NoGradGuard no_grad;
  const Tensor xhat = model.decode_image(latents.latent.to_tensor());
  Image out = crop_image(tensor_to_image(xhat), c.orig_width, c.orig_height);
  for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
  return out;
}

QuantizedLatent extract_latent(const CompressedImage& c, CodecModel& model, const CdfOptions& options) {
  return decode_latents(c, model, options).latent;
}

}  // namespace nzip
