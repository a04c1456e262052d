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

#include "nzip/losses.hpp"

#include <cmath>
#include <limits>

#include "nzip/entropy_model.hpp"
#include "nzip/errors.hpp"
#include "nzip/ops.hpp"

namespace nzip {

void LossWeights::validate() const {
  if (!(lambda_d >= 0.0)) throw ContractError("lambda_d must be >= 0");
  for (const auto& [task, lambda] : lambda_t) {
    if (!(lambda >= 0.0)) throw ContractError("lambda_t[" + task + "] must be >= 0");
  }
}

Tensor distortion_mse(const Tensor& x, const Tensor& x_hat) {
  if (x.shape() != x_hat.shape()) {
    throw DimensionError("distortion_mse: " + to_string(x.shape()) + " vs " + to_string(x_hat.shape()));
  }
  return mean(square(sub(x, x_hat)));
}

double psnr(double mse, double peak) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Tensor& x, const Tensor& x_hat, double peak) {
  NoGradGuard no_grad;
  return psnr(distortion_mse(x, x_hat).item(), peak);
}

LossTerms loss_naive(const Tensor& x, const CodecModel& model, const LossWeights& weights, Rng& rng) {
  weights.validate();
  LossTerms t;
  t.z = model.encode_latent(x);
  const HyperOutput hyper = model.hyper_forward(t.z, &rng);
  const Tensor z_noisy = quantize_noise(t.z, rng);
  t.x_hat = model.decode_image(z_noisy);

  const double pixels = static_cast<double>(x.size(0) * x.size(2) * x.size(3));
  t.latent_rate = mul_scalar(rate_bits(z_noisy, hyper.params), 1.0 / pixels);
  t.hyper_rate = mul_scalar(hyper_rate_bits(hyper.w_quantized, model.hyper_prior()), 1.0 / pixels);
  t.distortion = distortion_mse(x, t.x_hat);
  t.total = add(add(t.latent_rate, t.hyper_rate), mul_scalar(t.distortion, weights.lambda_d));
  return t;
}

LossTerms loss_task_informed(const Tensor& x_recon, const Tensor& x_task,
                             std::span<const std::int32_t> labels, const CodecModel& model,
                             const TaskRegistry& tasks, const LossWeights& weights, Rng& rng) {
  if (tasks.empty()) throw ContractError("loss_task_informed: no task registered");
  for (const auto& [id, lambda] : weights.lambda_t) {
    if (!tasks.contains(id)) throw ContractError("loss_task_informed: unregistered task '" + id + "'");
  }
  LossTerms t = loss_naive(x_recon, model, weights, rng);

  bool any = false;
  for (const auto& [id, lambda] : weights.lambda_t) any = any || lambda != 0.0;
  if (!any) return t;

  const Tensor z_task = quantize_noise(model.encode_latent(x_task), rng);
  for (const auto& [id, head] : tasks) {
    auto it = weights.lambda_t.find(id);
    if (it == weights.lambda_t.end() || it->second == 0.0) continue;
    Tensor logits = head->classify(z_task, true);
    Tensor term = mul_scalar(softmax_cross_entropy(logits, labels), it->second);
    t.task = t.task.defined() ? add(t.task, term) : term;
    t.task_logits = logits;
  }
  t.total = add(t.total, t.task);
  return t;
}

LossTerms loss_task_informed(const Tensor& x, std::span<const std::int32_t> labels,
                             const CodecModel& model, const TaskRegistry& tasks,
                             const LossWeights& weights, Rng& rng) {
  return loss_task_informed(x, x, labels, model, tasks, weights, rng);
}

}  // namespace nzip
