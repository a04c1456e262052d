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

#include "nzip/layers.hpp"
#include "nzip/ops.hpp"

namespace nzip {

enum class StemVariant { kSubpixel, kTruncated };

// Adapter between the 16x-downsampled latent and the classifier trunk.
struct StemConfig {
  StemVariant variant = StemVariant::kSubpixel;
  int pixel_shuffle_blocks = 2;  // 2: two x2 shuffles, 1: a single x4 shuffle
  bool use_residual_block = true;
  ActivationKind activation = ActivationKind::kRelu;
};

struct HeadConfig {
  StemConfig stem;
  std::size_t latent_channels = 32;
  std::size_t width = 64;  // trunk width C_f
  std::size_t residual_blocks = 4;
  std::size_t num_classes = 4;

  void validate() const;
};

// Classifier reading the quantized latent directly:
// stem -> residual trunk -> global average pool -> linear.
class TaskHead {
 public:
  explicit TaskHead(const HeadConfig& config = {}, std::uint64_t seed = 0);

  const HeadConfig& config() const { return config_; }

  // [N,C_z,h,w] -> [N,C_f,4h,4w] (subpixel) or [N,C_f,h,w] (truncated)
  Tensor stem(const Tensor& latent, bool training);
  // [N,C_z,h,w] -> logits [N,K]
  Tensor classify(const Tensor& latent, bool training);

  // Re-estimates every batch-norm running statistic as the plain average of
  // batch statistics over `latents`, visited in order in chunks of `batch`.
  // Weights are left untouched.
  void recalibrate_batch_norm(const Tensor& latents, std::size_t batch);

  // Names are prefixed "head."; batch-norm running statistics are included
  // as non-trainable entries.
  ParameterList parameters();

  // Config packed into a rank-1 tensor for the weight file.
  Tensor config_tensor() const;
  static HeadConfig config_from_tensor(std::span<const float> values);

 private:
  struct ConvBn {
    Conv2d conv;
    BatchNorm2d bn;
  };
  struct ResidualBlock {
    ConvBn first;
    ConvBn second;
  };

  Tensor conv_bn(ConvBn& layer, const Tensor& x, bool training);
  Tensor act(const Tensor& x) const;
  std::vector<BatchNorm2d*> batch_norms();

  HeadConfig config_;
  std::vector<ConvBn> stem_layers_;
  Conv2d shortcut_;       // subpixel residual path: 1x1 conv before a x4 shuffle
  Conv2d truncated_;      // truncated stem: 1x1 lift
  std::vector<ResidualBlock> trunk_;
  Linear fc_;
};

// Fraction of rows whose argmax equals the label.
double accuracy(const Tensor& logits, std::span<const std::int32_t> labels);

}  // namespace nzip
