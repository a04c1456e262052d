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

#include "nzip/rng.hpp"
#include "nzip/tensor.hpp"

namespace nzip {

inline constexpr double kSigmaMin = 0.05;
// Probability floor inside the rate so -log2 stays finite.
inline constexpr double kProbabilityFloor = 1e-9;

// Per-element mean and scale of the conditional Gaussian, shaped like the latent.
struct GaussianParams {
  Tensor mu;
  Tensor sigma;
};

// Integer-valued latent and its shape.
struct QuantizedLatent {
  Shape shape;
  std::vector<std::int32_t> values;

  Tensor to_tensor() const;
  bool operator==(const QuantizedLatent&) const = default;
};

// z + u with u ~ U(-1/2, 1/2) i.i.d.; gradient passes straight through.
Tensor quantize_noise(const Tensor& z, Rng& rng);
Tensor quantize_noise(const Tensor& z, std::uint64_t seed);

// Round half away from zero. Throws RangeError when |z| >= 2^31.
QuantizedLatent quantize_round(const Tensor& z);

// Standard normal CDF.
double normal_cdf(double x);

// N(mu, sigma) mass on [value - 1/2, value + 1/2].
double pmf(double value, double mu, double sigma);

// sum_i -log2 pmf(zhat_i; mu_i, sigma_i), differentiable in all three inputs.
Tensor rate_bits(const Tensor& zhat, const GaussianParams& params);

// Rate of the hyper-latent [N,C,H,W] under a per-channel prior (mu [C], sigma [C]).
Tensor hyper_rate_bits(const Tensor& what, const GaussianParams& channel_prior);

// max(exp(raw), floor). Below the floor the gradient is kept only when it
// would raise the scale.
Tensor scale_from_raw(const Tensor& raw, double floor = kSigmaMin);

struct CdfOptions {
  int precision = 16;              // counts sum to 2^precision
  double tail_mass = 0x1.0p-16;    // mass allowed outside the window
  std::int32_t max_half_width = 64;
};

// Quantized cumulative counts over a per-element integer window [lo, lo + K).
class CdfTable {
 public:
  CdfTable() = default;

  std::size_t size() const { return lo_.size(); }
  int precision() const { return precision_; }
  std::uint32_t total() const { return 1u << precision_; }

  std::int32_t lo(std::size_t i) const { return lo_[i]; }
  std::int32_t hi(std::size_t i) const { return lo_[i] + static_cast<std::int32_t>(alphabet_size(i)) - 1; }
  std::size_t alphabet_size(std::size_t i) const { return offset_[i + 1] - offset_[i] - 1; }
  // Cumulative counts c[0..K] for element i; c[0] = 0, c[K] = 2^P.
  std::span<const std::uint32_t> cdf(std::size_t i) const {
    return std::span<const std::uint32_t>(cdf_).subspan(offset_[i], offset_[i + 1] - offset_[i]);
  }

  // Appends one element; validates monotonicity and total mass.
  void push(std::int32_t lo, std::span<const std::uint32_t> cumulative);
  void set_precision(int p) { precision_ = p; }

  // Clamps a value into element i's window.
  std::int32_t clamp(std::size_t i, std::int32_t value) const;

 private:
  int precision_ = 16;
  std::vector<std::int32_t> lo_;
  std::vector<std::size_t> offset_{0};
  std::vector<std::uint32_t> cdf_;
};

// One row per element of mu/sigma (equal length).
CdfTable build_cdf_tables(std::span<const double> mu, std::span<const double> sigma,
                          const CdfOptions& options = {});
CdfTable build_cdf_tables(const GaussianParams& params, const CdfOptions& options = {});

}  // namespace nzip
