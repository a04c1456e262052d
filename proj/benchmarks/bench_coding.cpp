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

#include <cmath>
#include <vector>

#include "nzip/entropy_model.hpp"
#include "nzip/range_coder.hpp"
#include "nzip/rng.hpp"

namespace {

struct Workload {
  std::vector<double> mu, sigma;
  std::vector<std::int32_t> symbols;
  nzip::CdfTable tables;
};

// Latent-like statistics: means near zero, scales spread over two decades.
Workload make_workload(std::size_t n) {
  nzip::Rng rng(1);
  Workload w;
  for (std::size_t i = 0; i < n; ++i) {
    w.mu.push_back(rng.uniform(-4.0, 4.0));
    w.sigma.push_back(std::exp(rng.uniform(std::log(0.1), std::log(10.0))));
  }
  w.tables = nzip::build_cdf_tables(w.mu, w.sigma);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<std::int32_t>(std::lround(w.mu[i] + w.sigma[i] * rng.normal()));
    w.symbols.push_back(w.tables.clamp(i, v));
  }
  return w;
}

void BM_BuildCdfTables(benchmark::State& state) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nzip::build_cdf_tables(w.mu, w.sigma));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildCdfTables)->Arg(1 << 14);

void BM_RangeEncode(benchmark::State& state) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nzip::encode_symbols(w.symbols, w.tables));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RangeEncode)->Arg(1 << 14)->Arg(1 << 18);

void BM_RangeDecode(benchmark::State& state) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)));
  const auto bytes = nzip::encode_symbols(w.symbols, w.tables);
  for (auto _ : state) benchmark::DoNotOptimize(nzip::decode_symbols(bytes, w.tables, w.symbols.size()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RangeDecode)->Arg(1 << 14)->Arg(1 << 18);

}  // namespace
