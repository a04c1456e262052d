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

#include <cmath>

#include "doctest.h"
#include "nzip/entropy_model.hpp"
#include "nzip/errors.hpp"
#include "nzip/ops.hpp"
#include "test_support.hpp"

using namespace nzip;
using namespace nzip::testing;

namespace {

// Mass of N(mu, sigma) on [v - 1/2, v + 1/2] by quadrature in standardized units.
double quadrature_pmf(double v, double mu, double sigma) {
  return simpson_normal_mass((v - 0.5 - mu) / sigma, (v + 0.5 - mu) / sigma, 4000);
}

GaussianParams constant_params(Shape shape, double mu, double sigma) {
  return {Tensor(shape, mu), Tensor(std::move(shape), sigma)};
}

}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("noise stays inside the open unit interval and is centered") {
  Tensor z({1000000}, 0.25);
  Tensor y = quantize_noise(z, 42);
  double mean = 0.0;
  for (std::size_t i = 0; i < z.numel(); ++i) {
    const double d = y[i] - z[i];
    CHECK_MESSAGE((d > -0.5 && d < 0.5), "noise out of support at ", i);
    mean += d;
  }
  mean /= double(z.numel());
  CHECK(std::abs(mean) < 0.002);
}

TEST_CASE("noise is reproducible from its seed and passes gradients straight through") {
  Rng rng(1);
  Tensor z = leaf(random_tensor({4, 5}, rng));
  CHECK(max_abs_diff(quantize_noise(z, 7).data(), quantize_noise(z, 7).data()) == 0.0);
  sum(quantize_noise(z, 7)).backward();
  for (double g : z.grad()) CHECK(g == 1.0);
}

TEST_CASE("rounding: worked example, ties away from zero, integers fixed") {
  Tensor z({7}, std::vector<double>{3.25, -0.5, 0.5, 2.5, -2.5, 4.0, -7.0});
  QuantizedLatent q = quantize_round(z);
  CHECK(q.shape == z.shape());
  CHECK(q.values == std::vector<std::int32_t>{3, -1, 1, 3, -3, 4, -7});
  CHECK_THROWS_AS(quantize_round(Tensor({1}, 3e9)), RangeError);
  CHECK_THROWS_AS(quantize_round(Tensor({1}, -2147483648.5)), RangeError);
}

TEST_CASE("pmf closed-form values") {
  CHECK(std::abs(pmf(3, 4, 1) - 0.241731) < 1e-6);
  CHECK(std::abs(pmf(3, 4, 1) - 0.2417303374571288) < 1e-14);
  CHECK(std::abs(pmf(5, 5, 1) - 0.3829249225480262) < 1e-14);
}

TEST_CASE("pmf is symmetric about an integer mean") {
  for (double sigma : {0.05, 0.7, 3.0, 11.0})
    for (int k = 0; k < 6; ++k) CHECK(pmf(-2 + k, -2, sigma) == doctest::Approx(pmf(-2 - k, -2, sigma)).epsilon(1e-13));
}

TEST_CASE("pmf agrees with brute-force quadrature") {
  Rng rng(2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double mu = rng.uniform(-20, 20);
    const double sigma = rng.uniform(kSigmaMin, 10.0);
    const double v = std::round(mu + rng.uniform(-3, 3) * sigma);
    worst = std::max(worst, std::abs(pmf(v, mu, sigma) - quadrature_pmf(v, mu, sigma)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("pmf sums to one over +-10 sigma") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double mu = rng.uniform(-5, 5), sigma = rng.uniform(kSigmaMin, 20.0);
    double total = 0.0;
    for (double v = std::floor(mu - 10 * sigma) - 1; v <= std::ceil(mu + 10 * sigma) + 1; v += 1.0) total += pmf(v, mu, sigma);
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("rate of latents sitting on their means with unit scale") {
  const double per = -std::log2(quadrature_pmf(0, 0, 1));  // 1.38487 bits
  for (std::size_t n : {1u, 10u, 96u}) {
    Tensor z({n}, 2.0);
    CHECK(rate_bits(z, constant_params({n}, 2.0, 1.0)).item() == doctest::Approx(double(n) * per).epsilon(1e-9));
  }
  // The minimal rate: the tightest scale on the mean.
  const double oracle = -std::log2(simpson_normal_mass(-0.5 / kSigmaMin, 0.5 / kSigmaMin, 20000));
  const double r = rate_bits(Tensor({1}, 0.0), constant_params({1}, 0.0, kSigmaMin)).item();
  CHECK(r >= 0.0);
  CHECK(std::abs(r - oracle) < 1e-12);
  CHECK(rate_bits(Tensor({1}, 0.3), constant_params({1}, 0.0, kSigmaMin)).item() > r);
}

TEST_CASE("rate is strictly positive for finite inputs") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double mu = rng.uniform(-3, 3);
    CHECK(rate_bits(Tensor({1}, mu + rng.uniform(-2, 2)), constant_params({1}, mu, rng.uniform(0.05, 5))).item() > 0.0);
  }
}

TEST_CASE("hyper rate applies a per-channel prior") {
  Tensor w({2, 3, 1, 2}, 0.0);
  Tensor mu({3}, std::vector<double>{0.0, 1.0, -1.0});
  Tensor sigma({3}, std::vector<double>{1.0, 1.0, 1.0});
  // Channel 0 on its mean, channels 1 and 2 one unit away.
  const double on = -std::log2(quadrature_pmf(0, 0, 1)), off = -std::log2(quadrature_pmf(1, 0, 1));
  CHECK(hyper_rate_bits(w, {mu, sigma}).item() == doctest::Approx(4 * on + 8 * off).epsilon(1e-9));
}

TEST_CASE("finite differences: rate in latent, mean and scale") {
  Rng rng(5);
  Tensor z = leaf(random_tensor({2, 3, 2, 2}, rng, -3, 3));
  Tensor mu = leaf(random_tensor({2, 3, 2, 2}, rng, -2, 2));
  Tensor raw = leaf(random_tensor({2, 3, 2, 2}, rng, -1, 1.5));
  GradCheck r = gradient_check([&] { return rate_bits(z, {mu, scale_from_raw(raw)}); },
                               {{"z", z}, {"mu", mu}, {"raw_sigma", raw}});
  CAPTURE(r.worst);
  CHECK(r.max_rel_error < 1e-4);

  Tensor w = leaf(random_tensor({2, 3, 1, 2}, rng, -3, 3));
  Tensor pm = leaf(random_tensor({3}, rng));
  Tensor ps = leaf(random_tensor({3}, rng, 0.4, 2.0));
  GradCheck h = gradient_check([&] { return hyper_rate_bits(w, {pm, ps}); },
                               {{"w", w}, {"mu", pm}, {"sigma", ps}});
  CAPTURE(h.worst);
  CHECK(h.max_rel_error < 1e-4);
}

TEST_CASE("scale map floors at sigma_min and keeps an upward gradient") {
  Tensor raw = leaf(Tensor({3}, std::vector<double>{-10.0, 0.0, 1.0}));
  Tensor s = scale_from_raw(raw);
  CHECK(s[0] == kSigmaMin);
  CHECK(s[1] == 1.0);
  CHECK(s[2] == doctest::Approx(std::exp(1.0)));
  // A loss that falls as sigma grows lets the floored entry move up.
  sum(neg(s)).backward();
  CHECK(raw.grad()[0] < 0.0);
  raw.zero_grad();
  // A loss that grows with sigma leaves the floored entry still.
  sum(s).backward();
  CHECK(raw.grad()[0] == 0.0);
  CHECK(raw.grad()[2] == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("tight scale gives a tiny window dominated by the center") {
  const std::vector<double> mu{0.0}, sigma{kSigmaMin};
  CdfTable t = build_cdf_tables(mu, sigma);
  CHECK(t.hi(0) - t.lo(0) <= 4);
  const auto c = t.cdf(0);
  const std::size_t center = static_cast<std::size_t>(0 - t.lo(0));
  CHECK(double(c[center + 1] - c[center]) > 0.99 * double(t.total()));
}

TEST_CASE("tables are normalized, strictly increasing and close to the pmf") {
  Rng rng(6);
  std::vector<double> mu, sigma;
  for (int i = 0; i < 2000; ++i) {
    mu.push_back(rng.uniform(-50, 50));
    sigma.push_back(std::exp(rng.uniform(std::log(kSigmaMin), std::log(40.0))));
  }
  for (int precision : {8, 12, 16, 24}) {
    CdfOptions opt;
    opt.precision = precision;
    CdfTable t = build_cdf_tables(mu, sigma, opt);
    REQUIRE(t.size() == mu.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto c = t.cdf(i);
      REQUIRE(c.front() == 0u);
      REQUIRE(c.back() == t.total());
      const std::size_t k = t.alphabet_size(i);
      for (std::size_t j = 0; j + 1 < c.size(); ++j) REQUIRE(c[j + 1] > c[j]);
      if (precision < 16) continue;
      // A window capped at max_half_width folds more than tail_mass into its
      // edges; the bound then grows by the mass actually folded.
      const double outside = 1.0 - simpson_normal_mass((t.lo(i) - 0.5 - mu[i]) / sigma[i],
                                                       (t.hi(i) + 0.5 - mu[i]) / sigma[i], 400);
      const bool capped = k == std::size_t(2 * opt.max_half_width + 1);
      const double bound = 2.0 * double(k) / double(t.total()) + (capped ? std::max(outside, opt.tail_mass) : opt.tail_mass);
      if (!capped) REQUIRE(outside < opt.tail_mass * 1.001);
      for (std::size_t j = 0; j < k; ++j) {
        const double q = double(c[j + 1] - c[j]) / double(t.total());
        const double p = pmf(double(t.lo(i)) + double(j), mu[i], sigma[i]);
        REQUIRE(std::abs(q - p) <= bound);
      }
    }
  }
}

TEST_CASE("table options are validated") {
  const std::vector<double> mu{0.0}, sigma{1.0};
  CdfOptions opt;
  opt.precision = 7;
  CHECK_THROWS_AS(build_cdf_tables(mu, sigma, opt), ContractError);
  opt.precision = 25;
  CHECK_THROWS_AS(build_cdf_tables(mu, sigma, opt), ContractError);
  CHECK_THROWS_AS(build_cdf_tables(mu, std::vector<double>{0.0}, {}), ContractError);
  CdfTable t = build_cdf_tables(mu, sigma);
  CHECK(t.clamp(0, 1000) == t.hi(0));
  CHECK(t.clamp(0, -1000) == t.lo(0));
}

}  // TEST_SUITE
