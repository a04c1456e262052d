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

#include "nzip/task_head.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nzip/errors.hpp"

namespace nzip {

void HeadConfig::validate() const {
  if (stem.pixel_shuffle_blocks != 1 && stem.pixel_shuffle_blocks != 2) {
    throw ContractError("stem: pixel_shuffle_blocks must be 1 or 2");
  }
  if (latent_channels == 0 || width == 0 || num_classes < 2) {
    throw ContractError("head config: invalid channel or class count");
  }
}

TaskHead::TaskHead(const HeadConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const std::size_t cz = config_.latent_channels;
  const std::size_t cf = config_.width;
  auto make = [&](std::size_t in, std::size_t out, std::size_t k) {
    return ConvBn{Conv2d(in, out, k, 1, k / 2, rng, false), BatchNorm2d(out)};
  };

  if (config_.stem.variant == StemVariant::kSubpixel) {
    if (config_.stem.pixel_shuffle_blocks == 2) {
      stem_layers_.push_back(make(cz, 4 * cf, 3));   // -> shuffle x2
      stem_layers_.push_back(make(cf, 4 * cf, 3));   // -> shuffle x2
    } else {
      stem_layers_.push_back(make(cz, 16 * cf, 3));  // -> shuffle x4
      stem_layers_.push_back(make(cf, cf, 3));
    }
    stem_layers_.push_back(make(cf, cf, 3));
    if (config_.stem.use_residual_block) shortcut_ = Conv2d(cz, 16 * cf, 1, 1, 0, rng, false);
  } else {
    truncated_ = Conv2d(cz, cf, 1, 1, 0, rng);
  }
  for (std::size_t i = 0; i < config_.residual_blocks; ++i) {
    trunk_.push_back({make(cf, cf, 3), make(cf, cf, 3)});
  }
  fc_ = Linear(cf, config_.num_classes, rng);
}

Tensor TaskHead::act(const Tensor& x) const { return activation(x, {config_.stem.activation, 0.01}); }

Tensor TaskHead::conv_bn(ConvBn& layer, const Tensor& x, bool training) {
  return layer.bn(layer.conv(x), training);
}

Tensor TaskHead::stem(const Tensor& latent, bool training) {
  if (latent.rank() != 4 || latent.size(1) != config_.latent_channels) {
    throw DimensionError("task head expects Nx" + std::to_string(config_.latent_channels) +
                         "xhxw, got " + to_string(latent.shape()));
  }
  if (config_.stem.variant == StemVariant::kTruncated) return truncated_(latent);

  Tensor h = latent;
  if (config_.stem.pixel_shuffle_blocks == 2) {
    h = pixel_shuffle(act(conv_bn(stem_layers_[0], h, training)), 2);
    h = pixel_shuffle(act(conv_bn(stem_layers_[1], h, training)), 2);
  } else {
    h = pixel_shuffle(act(conv_bn(stem_layers_[0], h, training)), 4);
    h = act(conv_bn(stem_layers_[1], h, training));
  }
  h = conv_bn(stem_layers_[2], h, training);
  if (config_.stem.use_residual_block) h = add(h, pixel_shuffle(shortcut_(latent), 4));
  return act(h);
}

Tensor TaskHead::classify(const Tensor& latent, bool training) {
  Tensor h = stem(latent, training);
  for (ResidualBlock& block : trunk_) {
    Tensor inner = act(conv_bn(block.first, h, training));
    h = act(add(conv_bn(block.second, inner, training), h));
  }
  return fc_(global_avg_pool(h));
}

std::vector<BatchNorm2d*> TaskHead::batch_norms() {
  std::vector<BatchNorm2d*> out;
  for (ConvBn& l : stem_layers_) out.push_back(&l.bn);
  for (ResidualBlock& b : trunk_) {
    out.push_back(&b.first.bn);
    out.push_back(&b.second.bn);
  }
  return out;
}

void TaskHead::recalibrate_batch_norm(const Tensor& latents, std::size_t batch) {
  if (latents.rank() != 4 || latents.size(0) == 0 || batch == 0) {
    throw ContractError("recalibrate_batch_norm: need a non-empty [N,C,h,w] latent batch");
  }
  NoGradGuard no_grad;
  const std::vector<BatchNorm2d*> norms = batch_norms();
  std::vector<double> saved;
  for (BatchNorm2d* bn : norms) {
    saved.push_back(bn->momentum);
    std::fill(bn->running_mean.mutable_data().begin(), bn->running_mean.mutable_data().end(), 0.0);
    std::fill(bn->running_var.mutable_data().begin(), bn->running_var.mutable_data().end(), 0.0);
  }
  const Shape& s = latents.shape();
  const std::size_t per = s[1] * s[2] * s[3];
  const auto v = latents.data();
  std::size_t visited = 0;
  for (std::size_t begin = 0; begin < s[0]; begin += batch) {
    const std::size_t n = std::min(batch, s[0] - begin);
    if (n < 2) break;
    // Momentum 1/(k+1) turns the exponential average into a running mean.
    for (BatchNorm2d* bn : norms) bn->momentum = 1.0 / static_cast<double>(visited + 1);
    Tensor chunk({n, s[1], s[2], s[3]}, std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin * per),
                                                           v.begin() + static_cast<std::ptrdiff_t>((begin + n) * per)));
    classify(chunk, true);
    ++visited;
  }
  for (std::size_t i = 0; i < norms.size(); ++i) norms[i]->momentum = saved[i];
}

ParameterList TaskHead::parameters() {
  ParameterList out;
  for (std::size_t i = 0; i < stem_layers_.size(); ++i) {
    const std::string p = "head.stem.conv" + std::to_string(i + 1);
    stem_layers_[i].conv.collect(p, out);
    stem_layers_[i].bn.collect(p + ".bn", out);
  }
  if (shortcut_.weight.defined()) shortcut_.collect("head.stem.shortcut", out);
  if (truncated_.weight.defined()) truncated_.collect("head.stem.lift", out);
  for (std::size_t i = 0; i < trunk_.size(); ++i) {
    const std::string p = "head.trunk.block" + std::to_string(i + 1);
    trunk_[i].first.conv.collect(p + ".conv1", out);
    trunk_[i].first.bn.collect(p + ".bn1", out);
    trunk_[i].second.conv.collect(p + ".conv2", out);
    trunk_[i].second.bn.collect(p + ".bn2", out);
  }
  fc_.collect("head.fc", out);
  return out;
}

Tensor TaskHead::config_tensor() const {
  return Tensor({8}, std::vector<double>{
                         config_.stem.variant == StemVariant::kSubpixel ? 0.0 : 1.0,
                         static_cast<double>(config_.stem.pixel_shuffle_blocks),
                         config_.stem.use_residual_block ? 1.0 : 0.0,
                         static_cast<double>(static_cast<int>(config_.stem.activation)),
                         static_cast<double>(config_.latent_channels),
                         static_cast<double>(config_.width),
                         static_cast<double>(config_.residual_blocks),
                         static_cast<double>(config_.num_classes)});
}

HeadConfig TaskHead::config_from_tensor(std::span<const float> v) {
  if (v.size() != 8) throw DecodeError("head.config must hold 8 values");
  HeadConfig c;
  c.stem.variant = v[0] == 0.0f ? StemVariant::kSubpixel : StemVariant::kTruncated;
  c.stem.pixel_shuffle_blocks = static_cast<int>(v[1]);
  c.stem.use_residual_block = v[2] != 0.0f;
  const int act = static_cast<int>(v[3]);
  if (act < 0 || act > 3) throw DecodeError("head.config: unknown activation");
  c.stem.activation = static_cast<ActivationKind>(act);
  c.latent_channels = static_cast<std::size_t>(v[4]);
  c.width = static_cast<std::size_t>(v[5]);
  c.residual_blocks = static_cast<std::size_t>(v[6]);
  c.num_classes = static_cast<std::size_t>(v[7]);
  c.validate();
  return c;
}

double accuracy(const Tensor& logits, std::span<const std::int32_t> labels) {
  if (logits.rank() != 2 || logits.size(0) != labels.size()) throw DimensionError("accuracy: shape");
  const std::size_t n = logits.size(0), k = logits.size(1);
  if (n == 0) return 0.0;
  std::size_t hits = 0;
  const auto v = logits.data();
  for (std::size_t b = 0; b < n; ++b) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (v[b * k + j] > v[b * k + best]) best = j;
    }
    hits += static_cast<std::int32_t>(best) == labels[b];
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace nzip
