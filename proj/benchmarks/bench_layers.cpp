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

#include <benchmark/benchmark.h>

#include <vector>

#include "nzip/gdn.hpp"
#include "nzip/ops.hpp"
#include "nzip/rng.hpp"

namespace {

nzip::Tensor random_tensor(nzip::Shape shape, std::uint64_t seed) {
  nzip::Rng rng(seed);
  std::vector<double> v(nzip::numel_of(shape));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return nzip::Tensor(std::move(shape), std::move(v));
}

// One analysis stage of the desk encoder: 5x5, stride 2, 32 -> 32 channels.
void BM_Conv2dForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const nzip::Tensor x = random_tensor({1, 32, side, side}, 1);
  const nzip::Tensor w = random_tensor({32, 32, 5, 5}, 2);
  const nzip::Tensor b = random_tensor({32}, 3);
  nzip::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(nzip::conv2d(x, w, b, 2, 2));
}
BENCHMARK(BM_Conv2dForward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  nzip::Tensor x = random_tensor({8, 32, side, side}, 1);
  nzip::Tensor w = random_tensor({32, 32, 5, 5}, 2);
  nzip::Tensor b = random_tensor({32}, 3);
  x.set_requires_grad(true);
  w.set_requires_grad(true);
  for (auto _ : state) {
    nzip::sum(nzip::conv2d(x, w, b, 2, 2)).backward();
    w.zero_grad();
    x.zero_grad();
  }
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_TransposedConvForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const nzip::Tensor x = random_tensor({1, 32, side, side}, 1);
  const nzip::Tensor w = random_tensor({32, 32, 5, 5}, 2);
  const nzip::Tensor b = random_tensor({32}, 3);
  nzip::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(nzip::conv2d_transposed(x, w, b, 2, 2, 1));
}
BENCHMARK(BM_TransposedConvForward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Gdn(benchmark::State& state) {
  const nzip::Tensor x = random_tensor({1, 32, 64, 64}, 1);
  nzip::GdnParams p{nzip::Tensor::ones({32}), nzip::Tensor({32, 32}, 0.01)};
  nzip::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(nzip::gdn_forward(x, p));
}
BENCHMARK(BM_Gdn)->Unit(benchmark::kMillisecond);

}  // namespace
