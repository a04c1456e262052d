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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "harness.hpp"
#include "nzip/bitstream.hpp"
#include "nzip/dataset.hpp"
#include "nzip/image_io.hpp"
#include "nzip/weights_io.hpp"

namespace nzip::acceptance {

namespace fs = std::filesystem;

namespace {

int nzip(std::vector<std::string> args) {
  args.insert(args.begin(), "nzip");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != cli::kExitOk) progress() << "nzip " << args[1] << " exited " << code << ": " << err.str();
  return code;
}

}  // namespace

Verdict determinism(Workbench&) {
  const fs::path dir = fs::temp_directory_path() / "nzip_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto at = [&](const std::string& name) { return (dir / name).string(); };

  std::ofstream(at("run.cfg")) << "lr = 1e-3\nepochs = 3\nsteps_per_epoch = 20\nrecon_batch = 4\n"
                                  "task_batch = 8\nlambda_d = 100\nlambda_t.classify = 1\n"
                                  "latent_channels = 16\nhead.width = 8\nhead.residual_blocks = 1\n"
                                  "train_samples = 64\neval_samples = 16\n";
  const Image input = make_synthetic_dataset(10001, 4, 1, 48)[0].image;
  write_image(crop_image(input, 45, 37), at("input.png"));

  bool ran = true;
  for (const char* run : {"a", "b"}) {
    const std::string r = run;
    ran = ran && nzip({"train", "--config", at("run.cfg"), "--seed", "5", "--out", at(r + ".nzwt"), "--log",
                       at(r + ".csv")}) == 0;
    ran = ran && nzip({"compress", "--model", at(r + ".nzwt"), "--in", at("input.png"), "--out",
                       at(r + ".nzip")}) == 0;
    ran = ran && nzip({"compress", "--model", at(r + ".nzwt"), "--in", at("input.png"), "--out",
                       at(r + "2.nzip")}) == 0;
  }
  ran = ran && nzip({"train", "--config", at("run.cfg"), "--seed", "6", "--out", at("c.nzwt"), "--log",
                     at("c.csv")}) == 0;
  if (!ran) return {false, "a CLI run failed"};

  auto bytes = [&](const std::string& name) { return read_file(at(name)); };
  const bool logs_equal = bytes("a.csv") == bytes("b.csv");
  const bool weights_equal = bytes("a.nzwt") == bytes("b.nzwt");
  const bool files_equal = bytes("a.nzip") == bytes("b.nzip") && bytes("a.nzip") == bytes("a2.nzip") &&
                           bytes("b.nzip") == bytes("b2.nzip");
  const bool seed_matters = bytes("a.csv") != bytes("c.csv");

  std::ostringstream d;
  d << "seed 5 twice: logs " << (logs_equal ? "identical" : "DIFFER") << ", weights "
    << (weights_equal ? "identical" : "DIFFER") << ", .nzip files " << (files_equal ? "identical" : "DIFFER") << " ("
    << bytes("a.nzip").size() << " bytes); seed 6 log " << (seed_matters ? "differs" : "IDENTICAL");
  fs::remove_all(dir);
  return {logs_equal && weights_equal && files_equal && seed_matters, d.str()};
}

}  // namespace nzip::acceptance
