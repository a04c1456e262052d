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

#include "nzip/tensor.hpp"

namespace nzip {

// Elementwise arithmetic with numpy-style broadcasting (trailing-aligned).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }

Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor square(const Tensor& a);
Tensor pow(const Tensor& a, double exponent);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softplus(const Tensor& a);

// Adds a constant tensor of identical shape; gradient passes straight through.
Tensor add_constant(const Tensor& a, std::span<const double> offsets);

// Rounds half away from zero; no gradient.
Tensor round(const Tensor& a);

enum class ActivationKind { kRelu, kLeakyRelu, kMish, kSilu };

struct Activation {
  ActivationKind kind = ActivationKind::kRelu;
  double slope = 0.01;  // leaky_relu only
};

Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.01);
Tensor mish(const Tensor& a);
Tensor silu(const Tensor& a);
Tensor activation(const Tensor& a, Activation act);

// Full reductions to a scalar.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor reshape(const Tensor& a, Shape shape);

// [N,C,H,W] -> [N,count,H,W] taking channels [start, start+count).
Tensor slice_channels(const Tensor& a, std::size_t start, std::size_t count);
// [N,C,H,W] -> [N,C,h,w] keeping the top-left window.
Tensor crop(const Tensor& a, std::size_t height, std::size_t width);
// [N,C,H,W] -> [N,C]
Tensor global_avg_pool(const Tensor& a);
// Per-channel vector [C] broadcast to an [N,C,H,W] shape.
Tensor expand_channels(const Tensor& per_channel, const Shape& shape);

// x [N,F], weight [K,F], bias [K] -> [N,K].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// input [N,C,H,W], weight [O,C,k,k], bias [O] or undefined.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t padding);

// Adjoint of conv2d: input [N,O,H,W], weight [O,C,k,k] -> [N,C,H',W'] with
// H' = (H-1)*stride - 2*padding + k + output_padding.
Tensor conv2d_transposed(const Tensor& input, const Tensor& weight, const Tensor& bias,
                         std::size_t stride, std::size_t padding,
                         std::size_t output_padding = 0);

// [N, C*r*r, H, W] -> [N, C, r*H, r*W]
Tensor pixel_shuffle(const Tensor& input, std::size_t r);
// [N, C, r*H, r*W] -> [N, C*r*r, H, W]
Tensor pixel_unshuffle(const Tensor& input, std::size_t r);

// Running statistics owned by the caller; updated in training mode.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

Tensor batch_norm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                    BatchNormState& state, bool training);

// Mean softmax cross-entropy of logits [N,K] against integer labels.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels);

// Concatenates along axis 0; all other extents must agree.
Tensor concat_batch(std::span<const Tensor> parts);

}  // namespace nzip
