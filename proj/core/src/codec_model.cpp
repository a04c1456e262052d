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

#include "nzip/codec_model.hpp"

#include <string>

#include "nzip/errors.hpp"
#include "nzip/weights_io.hpp"

namespace nzip {

CodecConfig CodecConfig::scaled(std::size_t latent_channels) {
  CodecConfig c;
  c.latent_channels = latent_channels;
  c.hidden_channels = latent_channels;
  c.hyper_channels = latent_channels;
  return c;
}

void CodecConfig::validate() const {
  if (latent_channels == 0 || hidden_channels == 0 || hyper_channels == 0) {
    throw ContractError("codec config: channel counts must be positive");
  }
}

bool CodecConfig::operator==(const CodecConfig& o) const {
  return latent_channels == o.latent_channels && hidden_channels == o.hidden_channels &&
         hyper_channels == o.hyper_channels && hyper_activation.kind == o.hyper_activation.kind &&
         hyper_activation.slope == o.hyper_activation.slope;
}

CodecModel::CodecModel(const CodecConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const std::size_t n = config_.hidden_channels;
  const std::size_t cz = config_.latent_channels;
  const std::size_t ch = config_.hyper_channels;

  encoder_[0] = Conv2d(3, n, 5, 2, 2, rng);
  encoder_[1] = Conv2d(n, n, 5, 2, 2, rng);
  encoder_[2] = Conv2d(n, n, 5, 2, 2, rng);
  encoder_[3] = Conv2d(n, cz, 5, 2, 2, rng);
  for (auto& g : encoder_gdn_) g = Gdn(n, false);

  decoder_[0] = ConvTranspose2d(cz, n, 5, 2, 2, 1, rng);
  decoder_[1] = ConvTranspose2d(n, n, 5, 2, 2, 1, rng);
  decoder_[2] = ConvTranspose2d(n, n, 5, 2, 2, 1, rng);
  decoder_[3] = ConvTranspose2d(n, 3, 5, 2, 2, 1, rng);
  for (auto& g : decoder_igdn_) g = Gdn(n, true);

  hyper_encoder_[0] = Conv2d(cz, ch, 3, 2, 1, rng);
  hyper_encoder_[1] = Conv2d(ch, ch, 5, 2, 2, rng);
  hyper_encoder_[2] = Conv2d(ch, ch, 5, 2, 2, rng);

  hyper_decoder_[0] = ConvTranspose2d(ch, cz, 5, 2, 2, 1, rng);
  hyper_decoder_[1] = ConvTranspose2d(cz, config_.hyper_mid_channels(), 5, 2, 2, 1, rng);
  hyper_decoder_[2] =
      ConvTranspose2d(config_.hyper_mid_channels(), config_.hyper_out_channels(), 5, 2, 2, 1, rng);

  hyper_prior_mu_ = Tensor::zeros({ch});
  hyper_prior_mu_.set_requires_grad(true);
  hyper_prior_raw_scale_ = Tensor::zeros({ch});
  hyper_prior_raw_scale_.set_requires_grad(true);

  // Parameters live at the on-disk precision from the start.
  ParameterList params = parameters();
  snap_to_f32(params);
}

Tensor CodecModel::encode_latent(const Tensor& x) const {
  if (x.rank() != 4 || x.size(1) != 3) {
    throw DimensionError("encode_latent expects Nx3xHxW, got " + to_string(x.shape()));
  }
  if (x.size(2) % CodecConfig::kDownsample != 0 || x.size(3) % CodecConfig::kDownsample != 0 ||
      x.size(2) == 0 || x.size(3) == 0) {
    throw DimensionError("encode_latent: spatial size " + to_string(x.shape()) +
                         " must be a positive multiple of 16 (pad first)");
  }
  Tensor h = x;
  for (std::size_t i = 0; i < 3; ++i) h = encoder_gdn_[i](encoder_[i](h));
  return encoder_[3](h);
}

Tensor CodecModel::decode_image(const Tensor& zhat) const {
  if (zhat.rank() != 4 || zhat.size(1) != config_.latent_channels) {
    throw DimensionError("decode_image expects Nx" + std::to_string(config_.latent_channels) +
                         "xhxw, got " + to_string(zhat.shape()));
  }
  Tensor h = zhat;
  for (std::size_t i = 0; i < 3; ++i) h = decoder_igdn_[i](decoder_[i](h));
  return decoder_[3](h);
}

Tensor CodecModel::hyper_encode(const Tensor& z) const {
  if (z.rank() != 4 || z.size(1) != config_.latent_channels) {
    throw DimensionError("hyper_encode: unexpected latent shape " + to_string(z.shape()));
  }
  Tensor h = abs(z);
  h = activation(hyper_encoder_[0](h), config_.hyper_activation);
  h = activation(hyper_encoder_[1](h), config_.hyper_activation);
  return hyper_encoder_[2](h);
}

GaussianParams CodecModel::hyper_decode(const Tensor& w_quantized, const Shape& latent_shape) const {
  if (w_quantized.rank() != 4 || w_quantized.size(1) != config_.hyper_channels ||
      latent_shape.size() != 4 || latent_shape[1] != config_.latent_channels) {
    throw DimensionError("hyper_decode: unexpected shapes " + to_string(w_quantized.shape()) + ", " +
                         to_string(latent_shape));
  }
  Tensor h = activation(hyper_decoder_[0](w_quantized), config_.hyper_activation);
  h = activation(hyper_decoder_[1](h), config_.hyper_activation);
  h = hyper_decoder_[2](h);
  if (h.size(2) < latent_shape[2] || h.size(3) < latent_shape[3]) {
    throw DimensionError("hyper_decode: hyper-latent too small for latent " + to_string(latent_shape));
  }
  h = crop(h, latent_shape[2], latent_shape[3]);
  const std::size_t cz = config_.latent_channels;
  return {slice_channels(h, 0, cz), scale_from_raw(slice_channels(h, cz, cz), kSigmaMin)};
}

GaussianParams CodecModel::hyper_prior() const {
  return {hyper_prior_mu_, scale_from_raw(hyper_prior_raw_scale_, kSigmaMin)};
}

HyperOutput CodecModel::hyper_forward(const Tensor& z, Rng* noise) const {
  HyperOutput out;
  out.w = hyper_encode(z);
  out.w_quantized = noise ? quantize_noise(out.w, *noise) : quantize_round(out.w).to_tensor();
  out.params = hyper_decode(out.w_quantized, z.shape());
  return out;
}

std::size_t CodecModel::hyper_extent(std::size_t latent_extent) {
  std::size_t e = latent_extent;
  for (int i = 0; i < 3; ++i) e = (e + 1) / 2;
  return e;
}

ParameterList CodecModel::parameters() {
  ParameterList out;
  for (std::size_t i = 0; i < 4; ++i) {
    encoder_[i].collect("encoder.conv" + std::to_string(i + 1), out);
    if (i < 3) encoder_gdn_[i].collect("encoder.gdn" + std::to_string(i + 1), out);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    decoder_[i].collect("decoder.tconv" + std::to_string(i + 1), out);
    if (i < 3) decoder_igdn_[i].collect("decoder.igdn" + std::to_string(i + 1), out);
  }
  for (std::size_t i = 0; i < 3; ++i) hyper_encoder_[i].collect("hyper_encoder.conv" + std::to_string(i + 1), out);
  for (std::size_t i = 0; i < 3; ++i) hyper_decoder_[i].collect("hyper_decoder.tconv" + std::to_string(i + 1), out);
  out.push_back({"hyper_prior.mu", hyper_prior_mu_});
  out.push_back({"hyper_prior.raw_scale", hyper_prior_raw_scale_});
  return out;
}

std::size_t CodecModel::parameter_count() {
  std::size_t n = 0;
  for (const Parameter& p : parameters()) n += p.value.numel();
  return n;
}

ModelDigest CodecModel::digest() { return digest_bytes(serialize_weights(parameters())); }

}  // namespace nzip
