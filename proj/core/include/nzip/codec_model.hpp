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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nzip/entropy_model.hpp"
#include "nzip/gdn.hpp"
#include "nzip/layers.hpp"
#include "nzip/ops.hpp"
#include "nzip/rng.hpp"

namespace nzip {

using ModelDigest = std::array<std::uint8_t, 16>;

// Widths of the four compression networks. The reference architecture uses
// 256 channels throughout with 384/512-wide hyper-decoder stages; desk
// configurations scale every width by latent_channels / 256.
struct CodecConfig {
  static constexpr std::size_t kDownsample = 16;

  std::size_t latent_channels = 32;
  std::size_t hidden_channels = 32;
  std::size_t hyper_channels = 32;
  Activation hyper_activation{ActivationKind::kLeakyRelu, 0.01};

  // Scaled counterparts of the 384- and 512-channel hyper-decoder stages.
  std::size_t hyper_mid_channels() const { return (384 * latent_channels + 255) / 256; }
  std::size_t hyper_out_channels() const { return 2 * latent_channels; }

  static CodecConfig scaled(std::size_t latent_channels);
  void validate() const;
  bool operator==(const CodecConfig&) const;
};

struct HyperOutput {
  Tensor w;                // hyper-latent before quantization
  Tensor w_quantized;      // rounded or noise-perturbed
  GaussianParams params;   // per-element mu/sigma for the latent
};

class CodecModel {
 public:
  explicit CodecModel(const CodecConfig& config = {}, std::uint64_t seed = 0);

  const CodecConfig& config() const { return config_; }

  // x [N,3,H,W] with H, W multiples of 16 -> z [N,C_z,H/16,W/16]
  Tensor encode_latent(const Tensor& x) const;
  // zhat [N,C_z,h,w] -> x_hat [N,3,16h,16w], unclamped
  Tensor decode_image(const Tensor& zhat) const;

  // w = hyper_encoder(|z|)
  Tensor hyper_encode(const Tensor& z) const;
  // Per-element mu/sigma shaped like the latent; the synthesis output is
  // cropped to the latent's spatial extent.
  GaussianParams hyper_decode(const Tensor& w_quantized, const Shape& latent_shape) const;
  // Learned per-channel prior of the hyper-latent (mu [C_w], sigma [C_w]).
  GaussianParams hyper_prior() const;

  // Hyper analysis, quantization (noise when rng != nullptr, rounding
  // otherwise), hyper synthesis.
  HyperOutput hyper_forward(const Tensor& z, Rng* noise) const;

  // Spatial extent of the hyper-latent for a latent of the given extent.
  static std::size_t hyper_extent(std::size_t latent_extent);

  ParameterList parameters();
  std::size_t parameter_count();

  ModelDigest digest();

 private:
  CodecConfig config_;

  std::array<Conv2d, 4> encoder_;
  std::array<Gdn, 3> encoder_gdn_;
  std::array<ConvTranspose2d, 4> decoder_;
  std::array<Gdn, 3> decoder_igdn_;
  std::array<Conv2d, 3> hyper_encoder_;
  std::array<ConvTranspose2d, 3> hyper_decoder_;
  Tensor hyper_prior_mu_;
  Tensor hyper_prior_raw_scale_;
};

}  // namespace nzip
