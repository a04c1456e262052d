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

#include "nzip/bitstream.hpp"
#include "nzip/codec_model.hpp"
#include "nzip/dataset.hpp"

namespace {

// Untrained desk-width codec; coding cost depends on shapes, not on training.
struct Fixture {
  nzip::CodecModel model{nzip::CodecConfig{}, 1};
  nzip::Image image = nzip::make_synthetic_dataset(2, 4, 1, 256)[0].image;
  nzip::CompressedImage file = nzip::compress(image, model);
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_Compress256(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(nzip::compress(f.image, f.model));
}
BENCHMARK(BM_Compress256)->Unit(benchmark::kMillisecond);

// Decoding straight to the latent skips the image synthesis transform, which
// is what lets a task head run without reconstructing pixels.
void BM_ExtractLatent256(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(nzip::extract_latent(f.file, f.model));
}
BENCHMARK(BM_ExtractLatent256)->Unit(benchmark::kMillisecond);

void BM_Decompress256(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(nzip::decompress(f.file, f.model));
}
BENCHMARK(BM_Decompress256)->Unit(benchmark::kMillisecond);

}  // namespace
