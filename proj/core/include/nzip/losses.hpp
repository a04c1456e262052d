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

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "nzip/codec_model.hpp"
#include "nzip/rng.hpp"
#include "nzip/task_head.hpp"

namespace nzip {

// lambda_d weights distortion; lambda_t weights each registered task's loss.
struct LossWeights {
  double lambda_d = 100.0;
  std::map<std::string, double> lambda_t;

  void validate() const;
};

// Mean of squared differences.
Tensor distortion_mse(const Tensor& x, const Tensor& x_hat);

// 10 log10(peak^2 / mse); +infinity when mse == 0.
double psnr(double mse, double peak = 1.0);
double psnr(const Tensor& x, const Tensor& x_hat, double peak = 1.0);

struct LossTerms {
  Tensor total;
  Tensor latent_rate;   // bits / pixel
  Tensor hyper_rate;    // bits / pixel
  Tensor distortion;    // MSE
  Tensor task;          // sum_t lambda_t * task loss (undefined when no task term)
  Tensor x_hat;
  Tensor z;
  Tensor task_logits;
};

// Latent rate + hyper-latent rate + lambda_d * MSE, all latents perturbed by
// uniform noise. Rates are normalized by the number of pixels in the batch.
LossTerms loss_naive(const Tensor& x, const CodecModel& model, const LossWeights& weights, Rng& rng);

// Classification tasks keyed by id; heads read the noisy latent of x_task.
using TaskRegistry = std::map<std::string, TaskHead*>;

// loss_naive(x_recon) + sum_t lambda_t * CE(h_t(f(x_task) + u), labels).
// Throws ContractError when a lambda names an unregistered task.
LossTerms loss_task_informed(const Tensor& x_recon, const Tensor& x_task,
                             std::span<const std::int32_t> labels, const CodecModel& model,
                             const TaskRegistry& tasks, const LossWeights& weights, Rng& rng);

// Single-batch form: the same images feed reconstruction and the tasks.
LossTerms loss_task_informed(const Tensor& x, std::span<const std::int32_t> labels,
                             const CodecModel& model, const TaskRegistry& tasks,
                             const LossWeights& weights, Rng& rng);

}  // namespace nzip
