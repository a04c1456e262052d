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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nzip/codec_model.hpp"
#include "nzip/dataset.hpp"
#include "nzip/losses.hpp"
#include "nzip/task_head.hpp"

namespace nzip {

// Task id used for the single classification task of the synthetic corpus.
inline constexpr const char* kClassifyTask = "classify";

struct TrainConfig {
  double lr = 5e-5;
  double lr_decay = 1.0;            // multiplicative step decay ...
  std::size_t lr_decay_every = 0;   // ... every this many epochs (0: never)
  std::size_t recon_batch = 8;
  std::size_t task_batch = 32;
  std::size_t epochs = 10;
  std::size_t steps_per_epoch = 50;
  std::uint64_t seed = 0;
  LossWeights weights;

  // Rate control: when target_bpp > 0, lambda_d follows an integral
  // controller on a running average of the training rate,
  //   lambda_d *= (target / average)^rate_gain  after every step,
  // so that runs with different objectives can be compared at matched rates.
  double target_bpp = 0.0;
  double rate_gain = 0.002;

  std::size_t latent_channels = 32;  // desk codec width
  HeadConfig head;                   // used when a task weight is set

  // Synthetic corpus.
  std::size_t num_classes = 4;
  std::size_t image_size = 32;
  std::size_t train_samples = 512;
  std::size_t eval_samples = 64;

  void validate() const;
  bool has_task() const;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys are errors.
// Task weights are written lambda_t.<task> = value.
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);

struct EpochLog {
  std::size_t epoch = 0;
  double bpp_estimate = 0.0;  // entropy-model estimate at rounded latents
  double mse = 0.0;
  double psnr = 0.0;
  double task_loss = 0.0;     // NaN without a task
  double task_acc = 0.0;      // NaN without a task
};

struct Corpus {
  std::vector<SyntheticSample> train;
  std::vector<SyntheticSample> eval;
};

// Synthetic training and held-out sets for a config, seeded from config.seed.
Corpus make_corpus(const TrainConfig& config);

std::string log_csv_header();
std::string log_csv_row(const EpochLog& row);

struct EvalMetrics {
  double bpp_estimate = 0.0;
  double mse = 0.0;
  double psnr = 0.0;
  double task_loss = 0.0;
  double task_acc = 0.0;
};

// Metrics over rounded latents (no noise), batch-norm in eval mode.
EvalMetrics evaluate(CodecModel& model, TaskHead* head, std::span<const SyntheticSample> samples);

struct CodingMetrics {
  double bits_per_pixel = 0.0;  // measured on the coded files
  double mse = 0.0;             // of the decoded, clamped images
  double psnr = 0.0;
};

// Compresses and decompresses every image, averaging file bpp and pooling the
// squared error over all samples.
CodingMetrics measure_coding(CodecModel& model, std::span<const SyntheticSample> samples);

struct TrainResult {
  CodecModel model;
  std::unique_ptr<TaskHead> head;
  std::vector<EpochLog> log;
  double final_lambda_d = 0.0;  // differs from the configured value under rate control
  double train_rate = 0.0;      // running average of the noisy training rate, bits / pixel
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Joint training: each step draws one reconstruction batch and, when a task
// weight is set, one task batch of its own size. Throws DivergenceError on a
// non-finite loss. Weights are rounded to single precision at the end.
TrainResult train(const TrainConfig& config, std::span<const SyntheticSample> train_set,
                  std::span<const SyntheticSample> eval_set, const EpochCallback& on_epoch = {});

struct DownstreamConfig {
  HeadConfig head;
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t steps = 300;
  std::uint64_t seed = 0;
};

struct DownstreamResult {
  std::unique_ptr<TaskHead> head;
  double accuracy = 0.0;        // held out
  double train_accuracy = 0.0;
};

// Rounded latents round(f(pad(x))), computed without gradient tracking.
Tensor frozen_latents(CodecModel& model, std::span<const SyntheticSample> samples);

// Trains a fresh head on the rounded latents of a frozen codec. Throws
// ContractError if any codec parameter changed.
DownstreamResult train_downstream(CodecModel& frozen, std::span<const SyntheticSample> train_set,
                                  std::span<const SyntheticSample> eval_set, const DownstreamConfig& config);

}  // namespace nzip
