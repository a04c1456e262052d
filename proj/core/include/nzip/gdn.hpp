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

#include "nzip/layers.hpp"
#include "nzip/tensor.hpp"

namespace nzip {

inline constexpr double kGdnBetaFloor = 1e-6;

// beta [C] > 0, gamma [C,C] >= 0. The exponents are fixed: |x_j|^2 inside the
// sum and a square root on the normalizer.
struct GdnParams {
  Tensor beta;
  Tensor gamma;
};

// z_c = x_c / sqrt(beta_c + sum_j gamma_cj x_j^2), per spatial location.
Tensor gdn_forward(const Tensor& x, const GdnParams& p);

// z_c = x_c * sqrt(beta_c + sum_j gamma_cj x_j^2)
Tensor igdn_forward(const Tensor& x, const GdnParams& p);

class Gdn {
 public:
  Gdn() = default;
  // beta = 1, gamma = gamma_init * I.
  Gdn(std::size_t channels, bool inverse, double gamma_init = 0.1);

  Tensor operator()(const Tensor& x) const {
    return inverse_ ? igdn_forward(x, params) : gdn_forward(x, params);
  }
  void collect(const std::string& prefix, ParameterList& out);
  bool inverse() const { return inverse_; }

  GdnParams params;

 private:
  bool inverse_ = false;
};

}  // namespace nzip
