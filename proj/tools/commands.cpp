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

#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "nzip/bitstream.hpp"
#include "nzip/errors.hpp"
#include "nzip/image_io.hpp"
#include "nzip/train.hpp"
#include "nzip/weights_io.hpp"

namespace nzip::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config, out, log;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg = load_train_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  const Corpus corpus = make_corpus(cfg);

  std::ofstream log;
  if (!a.log.empty()) {
    log = open_output(a.log);
    log << log_csv_header() << '\n' << std::flush;
  }
  out << log_csv_header() << '\n';
  TrainResult r = train(cfg, corpus.train, corpus.eval, [&](const EpochLog& row) {
    const std::string line = log_csv_row(row);
    out << line << '\n' << std::flush;
    if (log.is_open()) log << line << '\n' << std::flush;
  });
  save_bundle(r.model, r.head.get(), a.out);
  out << "model " << to_hex(r.model.digest()) << " written to " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- compress

struct CompressArgs {
  std::string model, in, out;
  bool stats = false;
};

int cmd_compress(const CompressArgs& a, std::ostream& out) {
  CodecModel model = load_codec(a.model);
  const Image image = read_image(a.in);
  CompressReport report;
  const CompressedImage c = compress(image, model, &report);
  const std::vector<std::uint8_t> bytes = serialize_container(c);
  write_file(a.out, bytes);
  if (a.stats) {
    out << "bpp: " << fmt(report.bits_per_pixel, 17) << '\n'
        << "payload_bytes: " << c.payload_bytes() << '\n'
        << "file_bytes: " << bytes.size() << '\n'
        << "pixels: " << image.width * image.height << '\n'
        << "estimated_bits: " << fmt(report.estimated_bits, 10) << '\n'
        << "clamped_elements: " << report.clamped_elements << '\n'
        << "wall_seconds: " << fmt(report.wall_seconds) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- decompress / latent

struct DecodeArgs {
  std::string model, in, out;
};

int cmd_decompress(const DecodeArgs& a, std::ostream& out) {
  CodecModel model = load_codec(a.model);
  const CompressedImage c = parse_container(read_file(a.in));
  const Image image = decompress(c, model);
  write_image(image, a.out);
  out << image.width << "x" << image.height << " written to " << a.out << '\n';
  return kExitOk;
}

int cmd_latent(const DecodeArgs& a, std::ostream& out) {
  CodecModel model = load_codec(a.model);
  const CompressedImage c = parse_container(read_file(a.in));
  const QuantizedLatent z = extract_latent(c, model);
  nlohmann::json j;
  j["shape"] = z.shape;
  j["values"] = z.values;
  std::ofstream f = open_output(a.out);
  f << j.dump() << '\n';
  if (!f) throw IoError("write failed for " + a.out);
  out << "latent " << to_string(z.shape) << " written to " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- eval-downstream

struct DownstreamArgs {
  std::string model, out;
  std::uint64_t seed = 0;
  std::size_t classes = 4, train_samples = 2048, eval_samples = 1024, image_size = 32;
  DownstreamConfig config;
  std::string stem = "subpixel", activation = "relu";
  bool no_residual = false;
};

ActivationKind activation_from(const std::string& name) {
  if (name == "relu") return ActivationKind::kRelu;
  if (name == "leaky_relu") return ActivationKind::kLeakyRelu;
  if (name == "mish") return ActivationKind::kMish;
  return ActivationKind::kSilu;
}

int cmd_eval_downstream(DownstreamArgs a, std::ostream& out) {
  CodecModel model = load_codec(a.model);
  Rng rng(a.seed);
  const auto train_set = make_synthetic_dataset(rng.next_u64(), a.classes, a.train_samples, a.image_size);
  const auto eval_set = make_synthetic_dataset(rng.next_u64(), a.classes, a.eval_samples, a.image_size);
  a.config.seed = rng.next_u64();
  a.config.head.num_classes = a.classes;
  a.config.head.stem.variant = a.stem == "truncated" ? StemVariant::kTruncated : StemVariant::kSubpixel;
  a.config.head.stem.use_residual_block = !a.no_residual;
  a.config.head.stem.activation = activation_from(a.activation);
  DownstreamResult r = train_downstream(model, train_set, eval_set, a.config);
  out << "train_accuracy: " << fmt(r.train_accuracy) << '\n' << "accuracy: " << fmt(r.accuracy) << '\n';
  if (!a.out.empty()) save_bundle(model, r.head.get(), a.out);
  return kExitOk;
}

// ---------------------------------------------------------------- rd-curve

struct RdArgs {
  std::string config, out;
  std::vector<double> lambdas;
  std::optional<std::uint64_t> seed;
};

struct RdRow {
  double lambda_d = 0.0, lambda_t = 0.0, bpp = kNaN, psnr = kNaN, task_acc = kNaN;
  std::string failure;
};

RdRow run_sweep_point(const TrainConfig& base, double lambda_d) {
  RdRow row;
  row.lambda_d = lambda_d;
  auto it = base.weights.lambda_t.find(kClassifyTask);
  row.lambda_t = it == base.weights.lambda_t.end() ? 0.0 : it->second;
  TrainConfig cfg = base;
  cfg.weights.lambda_d = lambda_d;
  try {
    const Corpus corpus = make_corpus(cfg);
    TrainResult r = train(cfg, corpus.train, corpus.eval);
    const CodingMetrics m = measure_coding(r.model, corpus.eval);
    row.bpp = m.bits_per_pixel;
    row.psnr = m.psnr;
    if (r.head) row.task_acc = evaluate(r.model, r.head.get(), corpus.eval).task_acc;
  } catch (const DivergenceError& e) {
    row.failure = e.what();
  }
  return row;
}

int cmd_rd_curve(RdArgs a, std::ostream& out, std::ostream& err) {
  if (a.lambdas.empty()) throw ContractError("rd-curve: empty --lambdas");
  for (double l : a.lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ContractError("rd-curve: lambdas must be finite and >= 0");
  }
  TrainConfig base = load_train_config(a.config);
  if (a.seed) base.seed = *a.seed;
  std::ofstream csv = open_output(a.out);  // fail before hours of training

  std::sort(a.lambdas.begin(), a.lambdas.end());
  std::vector<RdRow> rows(a.lambdas.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_lock;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        rows[i] = run_sweep_point(base, a.lambdas[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_lock);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(worker_limit(), static_cast<unsigned>(rows.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  bool failed = false;
  csv << "lambda_d,lambda_t,bpp,psnr,task_acc\n";
  for (const RdRow& r : rows) {
    csv << fmt(r.lambda_d, 10) << ',' << fmt(r.lambda_t, 10) << ',' << fmt(r.bpp, 10) << ','
        << fmt(r.psnr, 10) << ',' << fmt(r.task_acc, 10) << '\n';
    if (!r.failure.empty()) {
      failed = true;
      err << "rd-curve: lambda_d=" << r.lambda_d << " failed: " << r.failure << '\n';
    }
    out << "lambda_d=" << fmt(r.lambda_d) << " bpp=" << fmt(r.bpp) << " psnr=" << fmt(r.psnr) << '\n';
  }
  csv.close();
  if (!csv) throw IoError("write failed for " + a.out);
  return failed ? kExitFailedRows : kExitOk;
}

}  // namespace

unsigned worker_limit() {
  const char* env = std::getenv("NZIP_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0) return 1;
  return static_cast<unsigned>(std::min<unsigned long>(v, 256));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned image codec with latent-space task heads", "nzip"};
  app.require_subcommand(1);

  TrainArgs train_args;
  std::uint64_t seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train a codec (and a task head when lambda_t is set)");
  train_cmd->add_option("--config", train_args.config, "key = value training config")->required();
  train_cmd->add_option("--out", train_args.out, "Output weight file (.nzwt)")->required();
  train_cmd->add_option("--log", train_args.log, "Per-epoch CSV log");
  auto* train_seed = train_cmd->add_option("--seed", seed, "Overrides the config seed");

  CompressArgs compress_args;
  auto* compress_cmd = app.add_subcommand("compress", "Compress a PPM/PNG image to .nzip");
  compress_cmd->add_option("--model", compress_args.model, "Codec weights (.nzwt)")->required();
  compress_cmd->add_option("--in", compress_args.in, "Input image")->required();
  compress_cmd->add_option("--out", compress_args.out, "Output .nzip file")->required();
  compress_cmd->add_flag("--stats", compress_args.stats, "Print rate statistics");
  compress_cmd->add_option("--seed", seed, "Accepted for uniformity; compression is deterministic");

  DecodeArgs decompress_args;
  auto* decompress_cmd = app.add_subcommand("decompress", "Decode a .nzip file to an image");
  decompress_cmd->add_option("--model", decompress_args.model, "Codec weights (.nzwt)")->required();
  decompress_cmd->add_option("--in", decompress_args.in, "Input .nzip file")->required();
  decompress_cmd->add_option("--out", decompress_args.out, "Output image (.png or .ppm)")->required();
  decompress_cmd->add_option("--seed", seed, "Accepted for uniformity; decoding is deterministic");

  DecodeArgs latent_args;
  auto* latent_cmd = app.add_subcommand("latent", "Decode only the quantized latent of a .nzip file");
  latent_cmd->add_option("--model", latent_args.model, "Codec weights (.nzwt)")->required();
  latent_cmd->add_option("--in", latent_args.in, "Input .nzip file")->required();
  latent_cmd->add_option("--out", latent_args.out, "Output JSON {shape, values}")->required();
  latent_cmd->add_option("--seed", seed, "Accepted for uniformity; decoding is deterministic");

  DownstreamArgs ds;
  auto* ds_cmd = app.add_subcommand("eval-downstream", "Train a classifier on frozen latents and report accuracy");
  ds_cmd->add_option("--model", ds.model, "Frozen codec weights (.nzwt)")->required();
  ds_cmd->add_option("--out", ds.out, "Write codec + trained head to this .nzwt");
  ds_cmd->add_option("--seed", ds.seed, "Seed for data and head");
  ds_cmd->add_option("--classes", ds.classes, "Number of texture classes")->check(CLI::Range(2, 64));
  ds_cmd->add_option("--train-samples", ds.train_samples, "Training images");
  ds_cmd->add_option("--eval-samples", ds.eval_samples, "Held-out images");
  ds_cmd->add_option("--image-size", ds.image_size, "Image side in pixels");
  ds_cmd->add_option("--steps", ds.config.steps, "Optimizer steps");
  ds_cmd->add_option("--lr", ds.config.lr, "Adam learning rate");
  ds_cmd->add_option("--batch", ds.config.batch, "Batch size");
  ds_cmd->add_option("--width", ds.config.head.width, "Trunk width");
  ds_cmd->add_option("--blocks", ds.config.head.residual_blocks, "Residual blocks in the trunk");
  ds_cmd->add_option("--stem", ds.stem, "subpixel or truncated")->check(CLI::IsMember({"subpixel", "truncated"}));
  ds_cmd->add_option("--shuffle-blocks", ds.config.head.stem.pixel_shuffle_blocks, "1 or 2")
      ->check(CLI::IsMember({1, 2}));
  ds_cmd->add_flag("--no-residual", ds.no_residual, "Drop the stem's residual path");
  ds_cmd->add_option("--activation", ds.activation, "relu, leaky_relu, mish or silu")
      ->check(CLI::IsMember({"relu", "leaky_relu", "mish", "silu"}));
  ds.config.head.width = 32;

  RdArgs rd;
  auto* rd_cmd = app.add_subcommand("rd-curve", "Train one model per lambda_d and tabulate rate, PSNR and accuracy");
  rd_cmd->add_option("--config", rd.config, "Base training config")->required();
  rd_cmd->add_option("--lambdas", rd.lambdas, "Comma-separated lambda_d values")->required()->delimiter(',');
  rd_cmd->add_option("--out", rd.out, "Output CSV")->required();
  auto* rd_seed = rd_cmd->add_option("--seed", seed, "Overrides the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) {
      if (train_seed->count() > 0) train_args.seed = seed;
      return cmd_train(train_args, out);
    }
    if (compress_cmd->parsed()) return cmd_compress(compress_args, out);
    if (decompress_cmd->parsed()) return cmd_decompress(decompress_args, out);
    if (latent_cmd->parsed()) return cmd_latent(latent_args, out);
    if (ds_cmd->parsed()) return cmd_eval_downstream(ds, out);
    if (rd_cmd->parsed()) {
      if (rd_seed->count() > 0) rd.seed = seed;
      return cmd_rd_curve(rd, out, err);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ModelMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitModelMismatch;
  } catch (const DecodeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadFile;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace nzip::cli
