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
#include <string>
#include <vector>

#include "nzip/ops.hpp"
#include "nzip/rng.hpp"
#include "nzip/tensor.hpp"

namespace nzip {

// Projection applied to a parameter after every optimizer step.
enum class Constraint { kNone, kLowerBound, kNonNegative };

struct Parameter {
  std::string name;
  Tensor value;
  Constraint constraint = Constraint::kNone;
  double bound = 0.0;  // kLowerBound floor
  bool trainable = true;  // false for buffers such as batch-norm running statistics
};

using ParameterList = std::vector<Parameter>;

// Throws ContractError on duplicate names.
void check_unique_names(const ParameterList& params);

// Clamps every constrained parameter into its feasible set.
void project_constraints(ParameterList& params);

// Rounds every value to the nearest IEEE single, the on-disk precision.
void snap_to_f32(ParameterList& params);

// Centered uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor uniform_fan_in(Shape shape, std::size_t fan_in, Rng& rng);

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
         std::size_t padding, Rng& rng, bool with_bias = true);

  Tensor operator()(const Tensor& x) const { return conv2d(x, weight, bias, stride, padding); }
  void collect(const std::string& prefix, ParameterList& out);

  Tensor weight;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  // Weight is stored [in_channels, out_channels, k, k], the conv2d layout of the adjoint.
  ConvTranspose2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                  std::size_t stride, std::size_t padding, std::size_t output_padding, Rng& rng);

  Tensor operator()(const Tensor& x) const {
    return conv2d_transposed(x, weight, bias, stride, padding, output_padding);
  }
  void collect(const std::string& prefix, ParameterList& out);

  Tensor weight;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t output_padding = 0;
};

class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in_features, std::size_t out_features, Rng& rng);

  Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }
  void collect(const std::string& prefix, ParameterList& out);

  Tensor weight;
  Tensor bias;
};

class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(std::size_t channels);

  // Training mode uses batch statistics and updates the running estimates.
  Tensor operator()(const Tensor& x, bool training);
  void collect(const std::string& prefix, ParameterList& out);

  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

}  // namespace nzip
