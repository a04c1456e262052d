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
#include "nzip/gdn.hpp"
#include "nzip/layers.hpp"
#include "nzip/ops.hpp"
#include "nzip/optim.hpp"
#include "test_support.hpp"

using namespace nzip;
using namespace nzip::testing;

TEST_SUITE("optim") {

TEST_CASE("first step moves each weight by at most lr") {
  Rng rng(1);
  Tensor w = leaf(random_tensor({50}, rng));
  Tensor g = random_tensor({50}, rng, -100, 100);
  ParameterList params{{"w", w}};
  const std::vector<double> before(w.data().begin(), w.data().end());
  sum(mul(w, g)).backward();
  Adam adam(AdamOptions{1e-3});
  adam.step(params);
  for (std::size_t i = 0; i < 50; ++i) {
    const double delta = w[i] - before[i];
    CHECK(std::abs(delta) <= 1e-3 * (1.0 + 1e-9));
    CHECK(std::abs(delta) > 0.99e-3);
    CHECK((delta < 0) == (g[i] > 0));
  }
  CHECK(adam.steps() == 1);
}

TEST_CASE("zero gradient gives zero update") {
  Tensor w = leaf(Tensor({4}, std::vector<double>{1, -2, 3, -4}));
  ParameterList params{{"w", w}};
  sum(mul_scalar(w, 0.0)).backward();
  Adam adam;
  adam.step(params);
  CHECK(w[0] == 1.0);
  CHECK(w[3] == -4.0);
}

TEST_CASE("matches a scalar reference trace over 100 steps") {
  // Minimizes (x - 3)^2 + 0.1 x^4 from x = -1.
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double x_ref = -1.0, m = 0.0, v = 0.0;
  Tensor x = leaf(Tensor({1}, -1.0));
  ParameterList params{{"x", x}};
  Adam adam(AdamOptions{lr, b1, b2, eps});
  for (int t = 1; t <= 100; ++t) {
    const double g = 2.0 * (x_ref - 3.0) + 0.4 * x_ref * x_ref * x_ref;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    x_ref -= lr * mh / (std::sqrt(vh) + eps);

    zero_grads(params);
    add(square(add_scalar(x, -3.0)), mul_scalar(pow(x, 4.0), 0.1)).backward();
    adam.step(params);
    REQUIRE(std::abs(x[0] - x_ref) < 1e-10);
  }
}

TEST_CASE("buffers are skipped and constraints reprojected") {
  Gdn gdn(2, false);
  ParameterList params;
  gdn.collect("gdn", params);
  Tensor buffer({2}, 5.0);
  params.push_back({"buffer", buffer, Constraint::kNone, 0.0, false});
  for (Parameter& p : params) {
    if (p.trainable) p.value.set_requires_grad(true);
  }
  // A huge positive gradient on beta and gamma pushes both below their floors.
  Tensor x({1, 2, 1, 1}, 1.0);
  sum(mul_scalar(gdn(x), -1e6)).backward();
  Adam adam(AdamOptions{10.0});
  adam.step(params);
  for (double b : gdn.params.beta.data()) CHECK(b >= kGdnBetaFloor);
  for (double g : gdn.params.gamma.data()) CHECK(g >= 0.0);
  CHECK(buffer[0] == 5.0);
}

}  // TEST_SUITE
