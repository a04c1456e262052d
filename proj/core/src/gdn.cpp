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

#include "nzip/gdn.hpp"

#include <cmath>
#include <memory>

#include "nzip/errors.hpp"

namespace nzip {

namespace {

using detail::Node;

Tensor divisive_norm(const Tensor& x, const GdnParams& p, bool inverse) {
  if (x.rank() != 4) throw DimensionError("gdn expects NxCxHxW, got " + to_string(x.shape()));
  const std::size_t n = x.size(0), c = x.size(1), hw = x.size(2) * x.size(3);
  if (p.beta.numel() != c || p.gamma.rank() != 2 || p.gamma.size(0) != c || p.gamma.size(1) != c) {
    throw DimensionError("gdn parameters do not match " + std::to_string(c) + " channels");
  }
  const auto beta = p.beta.data();
  const auto gamma = p.gamma.data();
  for (double b : beta) {
    if (!(b > 0.0)) throw ParameterError("gdn beta must be positive");
  }

  const auto xv = x.data();
  // norm holds beta_c + sum_j gamma_cj x_j^2 at every location.
  auto norm = std::make_shared<std::vector<double>>(xv.size());
  std::vector<double> out(xv.size());
  for (std::size_t b = 0; b < n; ++b) {
    const double* xb = xv.data() + b * c * hw;
    double* nb = norm->data() + b * c * hw;
    for (std::size_t ci = 0; ci < c; ++ci) {
      for (std::size_t s = 0; s < hw; ++s) nb[ci * hw + s] = beta[ci];
      for (std::size_t j = 0; j < c; ++j) {
        const double g = gamma[ci * c + j];
        if (g == 0.0) continue;
        const double* xj = xb + j * hw;
        for (std::size_t s = 0; s < hw; ++s) nb[ci * hw + s] += g * xj[s] * xj[s];
      }
    }
    for (std::size_t i = 0; i < c * hw; ++i) {
      const double r = std::sqrt(nb[i]);
      out[b * c * hw + i] = inverse ? xb[i] * r : xb[i] / r;
    }
  }

  return Tensor::make_result(x.shape(), std::move(out), {x, p.beta, p.gamma},
                             [n, c, hw, inverse, norm](Node& self) {
    Node& nx = *self.inputs[0];
    Node& nbeta = *self.inputs[1];
    Node& ngamma = *self.inputs[2];
    // a_c = d out_c / d norm_c times upstream grad:
    //   gdn:  -1/2 g_c x_c norm_c^{-3/2};   igdn: 1/2 g_c x_c norm_c^{-1/2}
    std::vector<double> a(c * hw);
    for (std::size_t b = 0; b < n; ++b) {
      const double* xb = nx.value.data() + b * c * hw;
      const double* gb = self.grad.data() + b * c * hw;
      const double* nb = norm->data() + b * c * hw;
      for (std::size_t i = 0; i < c * hw; ++i) {
        const double r = std::sqrt(nb[i]);
        a[i] = inverse ? 0.5 * gb[i] * xb[i] / r : -0.5 * gb[i] * xb[i] / (nb[i] * r);
      }
      if (nbeta.requires_grad) {
        auto g = nbeta.grad_buffer();
        for (std::size_t ci = 0; ci < c; ++ci) {
          double s = 0.0;
          for (std::size_t k = 0; k < hw; ++k) s += a[ci * hw + k];
          g[ci] += s;
        }
      }
      if (ngamma.requires_grad) {
        auto g = ngamma.grad_buffer();
        for (std::size_t ci = 0; ci < c; ++ci) {
          for (std::size_t j = 0; j < c; ++j) {
            const double* xj = xb + j * hw;
            double s = 0.0;
            for (std::size_t k = 0; k < hw; ++k) s += a[ci * hw + k] * xj[k] * xj[k];
            g[ci * c + j] += s;
          }
        }
      }
      if (nx.requires_grad) {
        auto g = nx.grad_buffer().subspan(b * c * hw, c * hw);
        for (std::size_t i = 0; i < c * hw; ++i) {
          const double r = std::sqrt(nb[i]);
          g[i] += inverse ? gb[i] * r : gb[i] / r;
        }
        // Cross-channel term: d norm_c / d x_k = 2 gamma_ck x_k.
        for (std::size_t ci = 0; ci < c; ++ci) {
          for (std::size_t k = 0; k < c; ++k) {
            const double gk = ngamma.value[ci * c + k];
            if (gk == 0.0) continue;
            const double* xk = xb + k * hw;
            for (std::size_t s = 0; s < hw; ++s) g[k * hw + s] += 2.0 * gk * xk[s] * a[ci * hw + s];
          }
        }
      }
    }
  });
}

}  // namespace

Tensor gdn_forward(const Tensor& x, const GdnParams& p) { return divisive_norm(x, p, false); }

Tensor igdn_forward(const Tensor& x, const GdnParams& p) { return divisive_norm(x, p, true); }

Gdn::Gdn(std::size_t channels, bool inverse, double gamma_init) : inverse_(inverse) {
  params.beta = Tensor::ones({channels});
  std::vector<double> g(channels * channels, 0.0);
  for (std::size_t i = 0; i < channels; ++i) g[i * channels + i] = gamma_init;
  params.gamma = Tensor({channels, channels}, std::move(g));
  params.beta.set_requires_grad(true);
  params.gamma.set_requires_grad(true);
}

void Gdn::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({prefix + ".beta", params.beta, Constraint::kLowerBound, kGdnBetaFloor});
  out.push_back({prefix + ".gamma", params.gamma, Constraint::kNonNegative});
}

}  // namespace nzip
