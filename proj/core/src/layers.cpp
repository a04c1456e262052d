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

#include "nzip/layers.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "nzip/errors.hpp"

namespace nzip {

void check_unique_names(const ParameterList& params) {
  std::unordered_set<std::string> seen;
  for (const Parameter& p : params) {
    if (!seen.insert(p.name).second) throw ContractError("duplicate parameter name: " + p.name);
  }
}

void project_constraints(ParameterList& params) {
  for (Parameter& p : params) {
    if (p.constraint == Constraint::kNone) continue;
    const double floor = p.constraint == Constraint::kLowerBound ? p.bound : 0.0;
    for (double& v : p.value.mutable_data()) v = std::max(v, floor);
  }
}

void snap_to_f32(ParameterList& params) {
  for (Parameter& p : params) {
    for (double& v : p.value.mutable_data()) v = static_cast<double>(static_cast<float>(v));
  }
}

Tensor uniform_fan_in(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::vector<double> values(numel_of(shape));
  for (double& v : values) v = rng.uniform(-bound, bound);
  Tensor t(std::move(shape), std::move(values));
  t.set_requires_grad(true);
  return t;
}

namespace {

Tensor trainable(Tensor t) {
  t.set_requires_grad(true);
  return t;
}

}  // namespace

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
               std::size_t stride_, std::size_t padding_, Rng& rng, bool with_bias)
    : stride(stride_), padding(padding_) {
  const std::size_t fan_in = in_channels * kernel * kernel;
  weight = uniform_fan_in({out_channels, in_channels, kernel, kernel}, fan_in, rng);
  if (with_bias) bias = uniform_fan_in({out_channels}, fan_in, rng);
}

void Conv2d::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({prefix + ".weight", weight});
  if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

ConvTranspose2d::ConvTranspose2d(std::size_t in_channels, std::size_t out_channels,
                                 std::size_t kernel, std::size_t stride_, std::size_t padding_,
                                 std::size_t output_padding_, Rng& rng)
    : stride(stride_), padding(padding_), output_padding(output_padding_) {
  // Each output pixel receives roughly in*k*k/stride^2 contributions.
  const std::size_t fan_in =
      std::max<std::size_t>(1, in_channels * kernel * kernel / (stride_ * stride_));
  weight = uniform_fan_in({in_channels, out_channels, kernel, kernel}, fan_in, rng);
  bias = uniform_fan_in({out_channels}, fan_in, rng);
}

void ConvTranspose2d::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Linear::Linear(std::size_t in_features, std::size_t out_features, Rng& rng) {
  weight = uniform_fan_in({out_features, in_features}, in_features, rng);
  bias = uniform_fan_in({out_features}, in_features, rng);
}

void Linear::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

BatchNorm2d::BatchNorm2d(std::size_t channels)
    : gamma(trainable(Tensor::ones({channels}))),
      beta(trainable(Tensor::zeros({channels}))),
      running_mean(Tensor::zeros({channels})),
      running_var(Tensor::ones({channels})) {}

Tensor BatchNorm2d::operator()(const Tensor& x, bool training) {
  BatchNormState state;
  state.momentum = momentum;
  state.eps = eps;
  state.running_mean.assign(running_mean.data().begin(), running_mean.data().end());
  state.running_var.assign(running_var.data().begin(), running_var.data().end());
  Tensor y = batch_norm2d(x, gamma, beta, state, training);
  if (training) {
    std::copy(state.running_mean.begin(), state.running_mean.end(), running_mean.mutable_data().begin());
    std::copy(state.running_var.begin(), state.running_var.end(), running_var.mutable_data().begin());
  }
  return y;
}

void BatchNorm2d::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
  out.push_back({prefix + ".running_mean", running_mean, Constraint::kNone, 0.0, false});
  out.push_back({prefix + ".running_var", running_var, Constraint::kNone, 0.0, false});
}

}  // namespace nzip
