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

#include "nzip/entropy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "nzip/errors.hpp"
#include "nzip/ops.hpp"

namespace nzip {

namespace {

using detail::Node;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLn2 = 0.69314718055994530942;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Mass on [d - 1/2, d + 1/2] of N(0, sigma) for d = |value - mu|. Uses the
// left tail so both erfc terms stay accurate far from the mean.
double centered_mass(double d, double sigma) {
  const double upper = 0.5 * std::erfc(-(0.5 - d) / sigma * kInvSqrt2);
  const double lower = 0.5 * std::erfc((0.5 + d) / sigma * kInvSqrt2);
  return upper - lower;
}

}  // namespace

Tensor QuantizedLatent::to_tensor() const {
  std::vector<double> v(values.begin(), values.end());
  return Tensor(shape, std::move(v));
}

Tensor quantize_noise(const Tensor& z, Rng& rng) {
  std::vector<double> u(z.numel());
  for (double& v : u) v = rng.centered_unit();
  return add_constant(z, u);
}

Tensor quantize_noise(const Tensor& z, std::uint64_t seed) {
  Rng rng(seed);
  return quantize_noise(z, rng);
}

QuantizedLatent quantize_round(const Tensor& z) {
  QuantizedLatent q;
  q.shape = z.shape();
  q.values.reserve(z.numel());
  constexpr double kLimit = 2147483648.0;  // 2^31
  for (double v : z.data()) {
    const double r = std::round(v);
    if (!(std::fabs(r) < kLimit)) {
      throw RangeError("latent value " + std::to_string(v) + " does not fit in 32 bits");
    }
    q.values.push_back(static_cast<std::int32_t>(r));
  }
  return q;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double pmf(double value, double mu, double sigma) {
  return centered_mass(std::fabs(value - mu), sigma);
}

Tensor rate_bits(const Tensor& zhat, const GaussianParams& params) {
  if (zhat.shape() != params.mu.shape() || zhat.shape() != params.sigma.shape()) {
    throw DimensionError("rate_bits: latent " + to_string(zhat.shape()) + " vs params " +
                         to_string(params.mu.shape()) + "/" + to_string(params.sigma.shape()));
  }
  const auto zv = zhat.data();
  const auto mv = params.mu.data();
  const auto sv = params.sigma.data();
  const std::size_t n = zv.size();
  // Per element: dp/dvalue and dp/dsigma divided by p (after the floor).
  auto dvalue = std::make_shared<std::vector<double>>(n);
  auto dsigma = std::make_shared<std::vector<double>>(n);
  double bits = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sv[i];
    const double p = std::max(pmf(zv[i], mv[i], s), kProbabilityFloor);
    bits -= std::log2(p);
    const double a = (zv[i] + 0.5 - mv[i]) / s;
    const double b = (zv[i] - 0.5 - mv[i]) / s;
    const double pa = normal_pdf(a), pb = normal_pdf(b);
    (*dvalue)[i] = (pa - pb) / s / p;
    (*dsigma)[i] = (-a * pa + b * pb) / s / p;
  }
  return Tensor::make_result(Shape{}, {bits}, {zhat, params.mu, params.sigma},
                             [dvalue, dsigma](Node& self) {
    const double scale = -self.grad[0] / kLn2;
    Node& nz = *self.inputs[0];
    Node& nm = *self.inputs[1];
    Node& ns = *self.inputs[2];
    if (nz.requires_grad) {
      auto g = nz.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * (*dvalue)[i];
    }
    if (nm.requires_grad) {
      auto g = nm.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= scale * (*dvalue)[i];
    }
    if (ns.requires_grad) {
      auto g = ns.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * (*dsigma)[i];
    }
  });
}

Tensor hyper_rate_bits(const Tensor& what, const GaussianParams& channel_prior) {
  if (what.rank() != 4) throw DimensionError("hyper_rate_bits expects NxCxHxW");
  GaussianParams expanded{expand_channels(channel_prior.mu, what.shape()),
                          expand_channels(channel_prior.sigma, what.shape())};
  return rate_bits(what, expanded);
}

Tensor scale_from_raw(const Tensor& raw, double floor) {
  const auto rv = raw.data();
  std::vector<double> out(rv.size());
  for (std::size_t i = 0; i < rv.size(); ++i) out[i] = std::max(std::exp(rv[i]), floor);
  return Tensor::make_result(raw.shape(), std::move(out), {raw}, [floor](Node& self) {
    Node& in = *self.inputs[0];
    auto g = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double e = std::exp(in.value[i]);
      const double up = self.grad[i];
      if (e >= floor || up < 0.0) g[i] += up * e;
    }
  });
}

void CdfTable::push(std::int32_t lo, std::span<const std::uint32_t> cumulative) {
  if (cumulative.size() < 2 || cumulative.front() != 0 || cumulative.back() != total()) {
    throw ContractError("cdf row must start at 0 and end at 2^precision");
  }
  for (std::size_t k = 1; k < cumulative.size(); ++k) {
    if (cumulative[k] <= cumulative[k - 1]) throw ContractError("cdf row must be strictly increasing");
  }
  lo_.push_back(lo);
  cdf_.insert(cdf_.end(), cumulative.begin(), cumulative.end());
  offset_.push_back(cdf_.size());
}

std::int32_t CdfTable::clamp(std::size_t i, std::int32_t value) const {
  return std::clamp(value, lo(i), hi(i));
}

CdfTable build_cdf_tables(std::span<const double> mu, std::span<const double> sigma,
                          const CdfOptions& options) {
  if (mu.size() != sigma.size()) throw DimensionError("build_cdf_tables: mu/sigma length mismatch");
  if (options.precision < 8 || options.precision > 24) {
    throw ContractError("build_cdf_tables: precision must lie in [8, 24]");
  }
  if (options.max_half_width < 0 || !(options.tail_mass > 0.0)) {
    throw ContractError("build_cdf_tables: bad tail options");
  }
  CdfTable table;
  table.set_precision(options.precision);
  const std::uint32_t total = 1u << options.precision;
  std::vector<double> prob;
  std::vector<std::uint32_t> counts, cumulative;

  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu[i];
    const double s = sigma[i];
    if (!(s > 0.0) || !std::isfinite(m)) throw ContractError("build_cdf_tables: invalid parameters");
    constexpr double kCenterLimit = 1073741824.0;  // 2^30 keeps lo/hi in int32
    const auto center =
        static_cast<std::int32_t>(std::clamp(std::round(m), -kCenterLimit, kCenterLimit));

    // Mass strictly left of the window edge and strictly right of it.
    auto left_tail = [&](std::int64_t lo) { return normal_cdf((static_cast<double>(lo) - 0.5 - m) / s); };
    auto right_tail = [&](std::int64_t hi) { return normal_cdf(-(static_cast<double>(hi) + 0.5 - m) / s); };

    std::int32_t half = 0;
    while (half < options.max_half_width &&
           left_tail(center - half) + right_tail(center + half) >= options.tail_mass) {
      ++half;
    }
    const std::int32_t lo = center - half;
    const std::size_t k = static_cast<std::size_t>(2 * half + 1);
    if (k > total) throw ContractError("build_cdf_tables: alphabet larger than 2^precision");

    prob.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) prob[j] = pmf(static_cast<double>(lo) + static_cast<double>(j), m, s);
    prob.front() += left_tail(lo);
    prob.back() += right_tail(lo + static_cast<std::int64_t>(k) - 1);

    // One count per symbol, the rest proportional to probability; rounding
    // leftovers go to the most probable symbol.
    const std::uint32_t spread = total - static_cast<std::uint32_t>(k);
    counts.assign(k, 1);
    std::int64_t assigned = static_cast<std::int64_t>(k);
    std::size_t mode = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto extra = static_cast<std::uint32_t>(std::floor(prob[j] * static_cast<double>(spread)));
      counts[j] += std::min(extra, spread);
      assigned += std::min(extra, spread);
      if (prob[j] > prob[mode]) mode = j;
    }
    std::int64_t leftover = static_cast<std::int64_t>(total) - assigned;
    if (leftover >= 0) {
      counts[mode] += static_cast<std::uint32_t>(leftover);
    } else {
      // Probabilities summed slightly above one; take the excess from the largest bins.
      while (leftover < 0) {
        std::size_t big = 0;
        for (std::size_t j = 1; j < k; ++j) {
          if (counts[j] > counts[big]) big = j;
        }
        const std::uint32_t take = std::min<std::uint32_t>(counts[big] - 1, static_cast<std::uint32_t>(-leftover));
        counts[big] -= take;
        leftover += take;
      }
    }

    cumulative.assign(k + 1, 0);
    for (std::size_t j = 0; j < k; ++j) cumulative[j + 1] = cumulative[j] + counts[j];
    table.push(lo, cumulative);
  }
  return table;
}

CdfTable build_cdf_tables(const GaussianParams& params, const CdfOptions& options) {
  if (params.mu.shape() != params.sigma.shape()) throw DimensionError("build_cdf_tables: shape mismatch");
  return build_cdf_tables(params.mu.data(), params.sigma.data(), options);
}

}  // namespace nzip
