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

#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <set>
#include <vector>

#include "CLI11.hpp"
#include "harness.hpp"

namespace nzip::acceptance {

TrainConfig desk_config(double lambda_d, std::uint64_t seed) {
  TrainConfig c;
  c.lr = 1e-3;
  c.epochs = 10;
  c.steps_per_epoch = 200;
  c.recon_batch = 8;
  c.latent_channels = 32;
  c.seed = seed;
  c.weights.lambda_d = lambda_d;
  return c;
}

Workbench::Trained& Workbench::trained(double lambda_d, std::uint64_t seed) {
  const auto key = std::make_pair(lambda_d, seed);
  auto it = codecs_.find(key);
  if (it == codecs_.end()) {
    Stopwatch sw;
    const TrainConfig c = desk_config(lambda_d, seed);
    const Corpus corpus = make_corpus(c);
    TrainResult r = train(c, corpus.train, corpus.eval);
    progress() << "trained desk codec lambda_d=" << lambda_d << " seed=" << seed << " in " << sw.seconds()
               << " s (log bpp " << r.log.back().bpp_estimate << ", psnr " << r.log.back().psnr << ")\n";
    it = codecs_.emplace(key, Trained{std::move(r.model), sw.seconds()}).first;
  }
  return it->second;
}

CodecModel& Workbench::desk_codec(double lambda_d, std::uint64_t seed) { return trained(lambda_d, seed).model; }

double Workbench::training_seconds(double lambda_d, std::uint64_t seed) { return trained(lambda_d, seed).seconds; }

}  // namespace nzip::acceptance

int main(int argc, char** argv) {
  using namespace nzip::acceptance;
  struct Entry {
    int id;
    const char* title;
    std::function<Verdict(Workbench&)> run;
  };
  const std::vector<Entry> criteria = {
      {1, "lossless entropy path", lossless_entropy_path},
      {2, "rate tightness", rate_tightness},
      {3, "pmf correctness", pmf_correctness},
      {4, "gradient integrity", gradient_integrity},
      {5, "rate-distortion direction", rd_tradeoff_direction},
      {6, "reduction identity", reduction_identity},
      {7, "quantization invariance", quantization_invariance},
      {8, "utility trend", utility_trend},
      {9, "stem trend", stem_trend},
      {10, "determinism", determinism},
  };

  CLI::App app("nzip acceptance suite");
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria (comma-separated ids)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());

  Workbench wb;
  int failed = 0;
  for (const Entry& e : criteria) {
    if (!selected.empty() && !selected.count(e.id)) continue;
    std::cout << "criterion " << e.id << " (" << e.title << ") running\n" << std::flush;
    Stopwatch sw;
    Verdict v;
    try {
      v = e.run(wb);
    } catch (const std::exception& ex) {
      v = {false, std::string("exception: ") + ex.what()};
    }
    failed += !v.pass;
    std::printf("[%s] criterion %d: %s (%.0f s) %s\n", v.pass ? "PASS" : "FAIL", e.id, e.title, sw.seconds(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
