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

#include "nzip/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "nzip/bitstream.hpp"
#include "nzip/entropy_model.hpp"
#include "nzip/errors.hpp"
#include "nzip/optim.hpp"
#include "nzip/weights_io.hpp"

namespace nzip {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kEvalChunk = 32;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw ContractError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d)) throw ContractError("config: '" + key + "' expects a non-negative integer");
  return static_cast<std::size_t>(d);
}

ActivationKind parse_activation(const std::string& v) {
  if (v == "relu") return ActivationKind::kRelu;
  if (v == "leaky_relu") return ActivationKind::kLeakyRelu;
  if (v == "mish") return ActivationKind::kMish;
  if (v == "silu") return ActivationKind::kSilu;
  throw ContractError("config: unknown activation '" + v + "'");
}

Tensor batch_of(std::span<const SyntheticSample> samples, std::span<const std::size_t> idx) {
  std::vector<Image> images;
  images.reserve(idx.size());
  for (std::size_t i : idx) images.push_back(samples[i].image);
  return images_to_batch(images);
}

std::vector<std::size_t> draw(Rng& rng, std::size_t population, std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t& i : idx) i = static_cast<std::size_t>(rng.below(population));
  return idx;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ContractError("train: lr must be > 0");
  if (!(lr_decay > 0.0)) throw ContractError("train: lr_decay must be > 0");
  if (!(target_bpp >= 0.0) || !(rate_gain >= 0.0)) throw ContractError("train: invalid rate control");
  if (recon_batch == 0 || task_batch == 0) throw ContractError("train: batch sizes must be positive");
  if (train_samples == 0 || eval_samples == 0) throw ContractError("train: empty dataset");
  if (image_size == 0 || image_size % CodecConfig::kDownsample != 0) {
    throw ContractError("train: image_size must be a positive multiple of 16");
  }
  weights.validate();
  CodecConfig::scaled(latent_channels).validate();
  if (has_task()) {
    for (const auto& [id, lambda] : weights.lambda_t) {
      if (id != kClassifyTask) throw ContractError("train: unregistered task '" + id + "'");
    }
    head.validate();
  }
}

bool TrainConfig::has_task() const {
  return std::any_of(weights.lambda_t.begin(), weights.lambda_t.end(),
                     [](const auto& kv) { return kv.second != 0.0; });
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "lr") c.lr = to_double(key, v);
    else if (key == "lr_decay") c.lr_decay = to_double(key, v);
    else if (key == "lr_decay_every") c.lr_decay_every = to_count(key, v);
    else if (key == "recon_batch") c.recon_batch = to_count(key, v);
    else if (key == "task_batch") c.task_batch = to_count(key, v);
    else if (key == "epochs") c.epochs = to_count(key, v);
    else if (key == "steps_per_epoch") c.steps_per_epoch = to_count(key, v);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_count(key, v));
    else if (key == "lambda_d") c.weights.lambda_d = to_double(key, v);
    else if (key == "target_bpp") c.target_bpp = to_double(key, v);
    else if (key == "rate_gain") c.rate_gain = to_double(key, v);
    else if (key.rfind("lambda_t.", 0) == 0) c.weights.lambda_t[key.substr(9)] = to_double(key, v);
    else if (key == "latent_channels") c.latent_channels = to_count(key, v);
    else if (key == "num_classes") c.num_classes = to_count(key, v);
    else if (key == "image_size") c.image_size = to_count(key, v);
    else if (key == "train_samples") c.train_samples = to_count(key, v);
    else if (key == "eval_samples") c.eval_samples = to_count(key, v);
    else if (key == "head.width") c.head.width = to_count(key, v);
    else if (key == "head.residual_blocks") c.head.residual_blocks = to_count(key, v);
    else if (key == "head.stem") {
      if (v == "subpixel") c.head.stem.variant = StemVariant::kSubpixel;
      else if (v == "truncated") c.head.stem.variant = StemVariant::kTruncated;
      else throw ContractError("config: head.stem must be subpixel or truncated");
    } else if (key == "head.shuffle_blocks") c.head.stem.pixel_shuffle_blocks = static_cast<int>(to_count(key, v));
    else if (key == "head.residual") c.head.stem.use_residual_block = to_count(key, v) != 0;
    else if (key == "head.activation") c.head.stem.activation = parse_activation(v);
    else throw ContractError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  c.head.latent_channels = c.latent_channels;
  c.head.num_classes = c.num_classes;
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_train_config(std::string(bytes.begin(), bytes.end()));
}

Corpus make_corpus(const TrainConfig& config) {
  Rng rng(config.seed ^ 0xD1B54A32D192ED03ULL);
  Corpus c;
  c.train = make_synthetic_dataset(rng.next_u64(), config.num_classes, config.train_samples, config.image_size);
  c.eval = make_synthetic_dataset(rng.next_u64(), config.num_classes, config.eval_samples, config.image_size);
  return c;
}

std::string log_csv_header() { return "epoch,bpp_estimate,mse,psnr,task_loss,task_acc"; }

std::string log_csv_row(const EpochLog& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.epoch << ',' << r.bpp_estimate << ',' << r.mse << ',' << r.psnr << ',' << r.task_loss << ','
     << r.task_acc;
  return os.str();
}

EvalMetrics evaluate(CodecModel& model, TaskHead* head, std::span<const SyntheticSample> samples) {
  if (samples.empty()) throw ContractError("evaluate: empty sample set");
  NoGradGuard no_grad;
  double bits = 0.0, sq = 0.0, ce = 0.0, hits = 0.0, pixels = 0.0, values = 0.0;
  for (std::size_t begin = 0; begin < samples.size(); begin += kEvalChunk) {
    const auto chunk = samples.subspan(begin, std::min(kEvalChunk, samples.size() - begin));
    std::vector<Image> images;
    for (const auto& s : chunk) images.push_back(pad_edge(s.image));
    const Tensor x = images_to_batch(images);
    const Tensor z = model.encode_latent(x);
    const HyperOutput hyper = model.hyper_forward(z, nullptr);
    const Tensor zhat = round(z);
    bits += rate_bits(zhat, hyper.params).item() + hyper_rate_bits(hyper.w_quantized, model.hyper_prior()).item();
    const Tensor xhat = model.decode_image(zhat);
    sq += sum(square(sub(x, xhat))).item();
    values += static_cast<double>(x.numel());
    for (const auto& s : chunk) pixels += static_cast<double>(s.image.width * s.image.height);
    if (head) {
      const auto labels = labels_of(chunk);
      const Tensor logits = head->classify(zhat, false);
      ce += softmax_cross_entropy(logits, labels).item() * static_cast<double>(chunk.size());
      hits += accuracy(logits, labels) * static_cast<double>(chunk.size());
    }
  }
  const double n = static_cast<double>(samples.size());
  EvalMetrics m;
  m.bpp_estimate = bits / pixels;
  m.mse = sq / values;
  m.psnr = psnr(m.mse);
  m.task_loss = head ? ce / n : kNaN;
  m.task_acc = head ? hits / n : kNaN;
  return m;
}

CodingMetrics measure_coding(CodecModel& model, std::span<const SyntheticSample> samples) {
  if (samples.empty()) throw ContractError("measure_coding: empty sample set");
  double bpp = 0.0, sq = 0.0, values = 0.0;
  for (const SyntheticSample& s : samples) {
    const CompressedImage c = compress(s.image, model);
    bpp += c.bits_per_pixel();
    const Image back = decompress(c, model);
    for (std::size_t i = 0; i < back.pixels.size(); ++i) {
      const double d = back.pixels[i] - s.image.pixels[i];
      sq += d * d;
    }
    values += static_cast<double>(back.pixels.size());
  }
  CodingMetrics m;
  m.bits_per_pixel = bpp / static_cast<double>(samples.size());
  m.mse = sq / values;
  m.psnr = psnr(m.mse);
  return m;
}

TrainResult train(const TrainConfig& config, std::span<const SyntheticSample> train_set,
                  std::span<const SyntheticSample> eval_set, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty() || eval_set.empty()) throw ContractError("train: empty dataset");
  Rng rng(config.seed);
  TrainResult result{CodecModel(CodecConfig::scaled(config.latent_channels), rng.next_u64()), nullptr, {}};
  const bool with_task = config.has_task();
  TaskRegistry tasks;
  ParameterList params = result.model.parameters();
  if (with_task) {
    HeadConfig hc = config.head;
    hc.latent_channels = config.latent_channels;
    result.head = std::make_unique<TaskHead>(hc, rng.next_u64());
    tasks[kClassifyTask] = result.head.get();
    for (Parameter& p : result.head->parameters()) params.push_back(p);
  }
  Rng noise = rng.split();
  Adam adam(AdamOptions{config.lr});
  LossWeights weights = config.weights;
  double rate_average = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.lr_decay_every > 0 && epoch > 1 && (epoch - 1) % config.lr_decay_every == 0) {
      adam.set_lr(adam.lr() * config.lr_decay);
    }
    for (std::size_t step = 0; step < config.steps_per_epoch; ++step) {
      const auto recon_idx = draw(rng, train_set.size(), config.recon_batch);
      const Tensor x = batch_of(train_set, recon_idx);
      LossTerms terms;
      if (with_task) {
        const auto task_idx = draw(rng, train_set.size(), config.task_batch);
        std::vector<std::int32_t> labels;
        for (std::size_t i : task_idx) labels.push_back(train_set[i].label);
        terms = loss_task_informed(x, batch_of(train_set, task_idx), labels, result.model, tasks,
                                   weights, noise);
      } else {
        terms = loss_naive(x, result.model, weights, noise);
      }
      const double loss = terms.total.item();
      if (!std::isfinite(loss)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                              std::to_string(step));
      }
      zero_grads(params);
      terms.total.backward();
      adam.step(params);
      const double rate = terms.latent_rate.item() + terms.hyper_rate.item();
      rate_average = rate_average < 0.0 ? rate : 0.99 * rate_average + 0.01 * rate;
      if (config.target_bpp > 0.0) {
        if (rate_average > 0.0) {
          weights.lambda_d *= std::clamp(std::pow(config.target_bpp / rate_average, config.rate_gain), 0.5, 2.0);
        }
      }
    }
    snap_to_f32(params);
    const EvalMetrics m = evaluate(result.model, result.head.get(), eval_set);
    EpochLog row{epoch, m.bpp_estimate, m.mse, m.psnr, m.task_loss, m.task_acc};
    if (!std::isfinite(m.bpp_estimate) || !std::isfinite(m.mse)) {
      throw DivergenceError("non-finite evaluation metrics after epoch " + std::to_string(epoch));
    }
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  snap_to_f32(params);
  result.final_lambda_d = weights.lambda_d;
  result.train_rate = rate_average;
  return result;
}

Tensor frozen_latents(CodecModel& model, std::span<const SyntheticSample> samples) {
  NoGradGuard no_grad;
  std::vector<Tensor> parts;
  for (std::size_t begin = 0; begin < samples.size(); begin += kEvalChunk) {
    const auto chunk = samples.subspan(begin, std::min(kEvalChunk, samples.size() - begin));
    std::vector<Image> images;
    for (const auto& s : chunk) images.push_back(pad_edge(s.image));
    parts.push_back(quantize_round(model.encode_latent(images_to_batch(images))).to_tensor());
  }
  return concat_batch(parts);
}

DownstreamResult train_downstream(CodecModel& frozen, std::span<const SyntheticSample> train_set,
                                  std::span<const SyntheticSample> eval_set, const DownstreamConfig& config) {
  if (train_set.empty() || eval_set.empty()) throw ContractError("train_downstream: empty dataset");
  const ModelDigest before = frozen.digest();
  HeadConfig hc = config.head;
  hc.latent_channels = frozen.config().latent_channels;

  const Tensor train_z = frozen_latents(frozen, train_set);
  const Tensor eval_z = frozen_latents(frozen, eval_set);
  const std::vector<std::int32_t> train_labels = labels_of(train_set);
  const std::vector<std::int32_t> eval_labels = labels_of(eval_set);

  Rng rng(config.seed);
  DownstreamResult out;
  out.head = std::make_unique<TaskHead>(hc, rng.next_u64());
  ParameterList params = out.head->parameters();
  Adam adam(AdamOptions{config.lr});

  const Shape& zs = train_z.shape();
  const std::size_t per = zs[1] * zs[2] * zs[3];
  const auto zd = train_z.data();
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto idx = draw(rng, train_set.size(), config.batch);
    std::vector<double> values;
    values.reserve(idx.size() * per);
    std::vector<std::int32_t> labels;
    for (std::size_t i : idx) {
      values.insert(values.end(), zd.begin() + static_cast<std::ptrdiff_t>(i * per),
                    zd.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
      labels.push_back(train_labels[i]);
    }
    const Tensor batch({idx.size(), zs[1], zs[2], zs[3]}, std::move(values));
    const Tensor loss = softmax_cross_entropy(out.head->classify(batch, true), labels);
    if (!std::isfinite(loss.item())) throw DivergenceError("downstream head diverged");
    zero_grads(params);
    loss.backward();
    adam.step(params);
  }

  out.head->recalibrate_batch_norm(train_z, config.batch);
  {
    NoGradGuard no_grad;
    out.accuracy = accuracy(out.head->classify(eval_z, false), eval_labels);
    out.train_accuracy = accuracy(out.head->classify(train_z, false), train_labels);
  }
  if (frozen.digest() != before) throw ContractError("train_downstream: frozen codec weights changed");
  return out;
}

}  // namespace nzip
