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

#include "nzip/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "nzip/errors.hpp"

namespace nzip {

namespace {

using detail::Node;

// Index maps from each output element to its source element in a and b.
struct Broadcast {
  Shape shape;
  std::vector<std::size_t> ia;
  std::vector<std::size_t> ib;
  bool same = false;
};

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError("cannot broadcast " + to_string(a) + " with " + to_string(b));
    }
    out[i] = std::max(da, db);
  }
  return out;
}

std::vector<std::size_t> source_index(const Shape& out, const Shape& src) {
  const std::size_t rank = out.size();
  const std::size_t offset = rank - src.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t i = rank; i-- > offset;) {
    const std::size_t d = src[i - offset];
    stride[i] = d == 1 ? 0 : s;
    s *= d;
  }
  const std::size_t n = numel_of(out);
  std::vector<std::size_t> idx(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    idx[k] = pos;
    for (std::size_t d = rank; d-- > 0;) {
      ++counter[d];
      pos += stride[d];
      if (counter[d] < out[d]) break;
      pos -= stride[d] * counter[d];
      counter[d] = 0;
    }
  }
  return idx;
}

std::shared_ptr<const Broadcast> make_broadcast(const Tensor& a, const Tensor& b) {
  auto bc = std::make_shared<Broadcast>();
  if (a.shape() == b.shape()) {
    bc->shape = a.shape();
    bc->same = true;
    return bc;
  }
  bc->shape = broadcast_shape(a.shape(), b.shape());
  bc->ia = source_index(bc->shape, a.shape());
  bc->ib = source_index(bc->shape, b.shape());
  return bc;
}

// f(x, y) -> value; dfx/dfy give local partials given x, y, out.
template <typename F, typename DA, typename DB>
Tensor binary_op(const Tensor& a, const Tensor& b, F f, DA dfa, DB dfb) {
  auto bc = make_broadcast(a, b);
  const std::size_t n = numel_of(bc->shape);
  std::vector<double> out(n);
  const auto av = a.data();
  const auto bv = b.data();
  if (bc->same) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i], bv[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(av[bc->ia[i]], bv[bc->ib[i]]);
  }
  return Tensor::make_result(bc->shape, std::move(out), {a, b}, [bc, dfa, dfb](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    const std::size_t m = self.value.size();
    auto ia = [&](std::size_t i) { return bc->same ? i : bc->ia[i]; };
    auto ib = [&](std::size_t i) { return bc->same ? i : bc->ib[i]; };
    if (na.requires_grad) {
      auto ga = na.grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        ga[ia(i)] += self.grad[i] * dfa(na.value[ia(i)], nb.value[ib(i)], self.value[i]);
      }
    }
    if (nb.requires_grad) {
      auto gb = nb.grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        gb[ib(i)] += self.grad[i] * dfb(na.value[ia(i)], nb.value[ib(i)], self.value[i]);
      }
    }
  });
}

// y = f(x) with dy/dx = df(x, y).
template <typename F, typename DF>
Tensor unary_op(const Tensor& a, F f, DF df) {
  const auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  return Tensor::make_result(a.shape(), std::move(out), {a}, [df](Node& self) {
    Node& in = *self.inputs[0];
    auto g = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(in.value[i], self.value[i]);
  });
}

double stable_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(what) + " expects rank " + std::to_string(rank) +
                         ", got " + to_string(t.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; }, [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double x, double y, double) { return -x / (y * y); });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary_op(
      a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double s) {
  return unary_op(
      a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }

Tensor abs(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor pow(const Tensor& a, double exponent) {
  return unary_op(
      a, [exponent](double x) { return std::pow(x, exponent); },
      [exponent](double x, double) { return exponent * std::pow(x, exponent - 1.0); });
}

Tensor exp(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor sqrt(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& a) {
  return unary_op(a, stable_softplus, [](double x, double) { return stable_sigmoid(x); });
}

Tensor add_constant(const Tensor& a, std::span<const double> offsets) {
  if (offsets.size() != a.numel()) {
    throw DimensionError("add_constant: offset count does not match " + to_string(a.shape()));
  }
  const auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + offsets[i];
  return Tensor::make_result(a.shape(), std::move(out), {a}, [](Node& self) {
    auto g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor round(const Tensor& a) {
  const auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::round(av[i]);
  return Tensor(a.shape(), std::move(out));
}

Tensor relu(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary_op(
      a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor mish(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x * std::tanh(stable_softplus(x)); },
      [](double x, double) {
        const double t = std::tanh(stable_softplus(x));
        return t + x * (1.0 - t * t) * stable_sigmoid(x);
      });
}

Tensor silu(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x * stable_sigmoid(x); },
      [](double x, double) {
        const double s = stable_sigmoid(x);
        return s * (1.0 + x * (1.0 - s));
      });
}

Tensor activation(const Tensor& a, Activation act) {
  switch (act.kind) {
    case ActivationKind::kRelu:
      return relu(a);
    case ActivationKind::kLeakyRelu:
      return leaky_relu(a, act.slope);
    case ActivationKind::kMish:
      return mish(a);
    case ActivationKind::kSilu:
      return silu(a);
  }
  throw ContractError("unknown activation");
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return Tensor::make_result(Shape{}, {s}, {a}, [](Node& self) {
    auto g = self.inputs[0]->grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ContractError("mean of empty tensor");
  return mul_scalar(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel_of(shape) != a.numel()) {
    throw DimensionError("reshape " + to_string(a.shape()) + " -> " + to_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return Tensor::make_result(std::move(shape), std::move(out), {a}, [](Node& self) {
    auto g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor slice_channels(const Tensor& a, std::size_t start, std::size_t count) {
  require_rank(a, 4, "slice_channels");
  const std::size_t n = a.size(0), c = a.size(1), hw = a.size(2) * a.size(3);
  if (start + count > c) throw DimensionError("slice_channels: range exceeds channel count");
  std::vector<double> out(n * count * hw);
  const auto av = a.data();
  for (std::size_t b = 0; b < n; ++b) {
    std::copy_n(av.begin() + (b * c + start) * hw, count * hw, out.begin() + b * count * hw);
  }
  return Tensor::make_result({n, count, a.size(2), a.size(3)}, std::move(out), {a},
                             [n, c, hw, start, count](Node& self) {
                               auto g = self.inputs[0]->grad_buffer();
                               for (std::size_t b = 0; b < n; ++b) {
                                 for (std::size_t i = 0; i < count * hw; ++i) {
                                   g[(b * c + start) * hw + i] += self.grad[b * count * hw + i];
                                 }
                               }
                             });
}

Tensor crop(const Tensor& a, std::size_t height, std::size_t width) {
  require_rank(a, 4, "crop");
  const std::size_t n = a.size(0), c = a.size(1), h = a.size(2), w = a.size(3);
  if (height > h || width > w) throw DimensionError("crop window larger than input");
  if (height == h && width == w) return a;
  std::vector<double> out(n * c * height * width);
  const auto av = a.data();
  for (std::size_t p = 0; p < n * c; ++p) {
    for (std::size_t y = 0; y < height; ++y) {
      std::copy_n(av.begin() + (p * h + y) * w, width, out.begin() + (p * height + y) * width);
    }
  }
  return Tensor::make_result({n, c, height, width}, std::move(out), {a},
                             [n, c, h, w, height, width](Node& self) {
                               auto g = self.inputs[0]->grad_buffer();
                               for (std::size_t p = 0; p < n * c; ++p) {
                                 for (std::size_t y = 0; y < height; ++y) {
                                   for (std::size_t x = 0; x < width; ++x) {
                                     g[(p * h + y) * w + x] += self.grad[(p * height + y) * width + x];
                                   }
                                 }
                               }
                             });
}

Tensor global_avg_pool(const Tensor& a) {
  require_rank(a, 4, "global_avg_pool");
  const std::size_t n = a.size(0), c = a.size(1), hw = a.size(2) * a.size(3);
  std::vector<double> out(n * c, 0.0);
  const auto av = a.data();
  for (std::size_t p = 0; p < n * c; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) s += av[p * hw + i];
    out[p] = s / static_cast<double>(hw);
  }
  return Tensor::make_result({n, c}, std::move(out), {a}, [n, c, hw](Node& self) {
    auto g = self.inputs[0]->grad_buffer();
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t p = 0; p < n * c; ++p) {
      for (std::size_t i = 0; i < hw; ++i) g[p * hw + i] += self.grad[p] * inv;
    }
  });
}

Tensor expand_channels(const Tensor& per_channel, const Shape& shape) {
  require_rank(per_channel, 1, "expand_channels");
  if (shape.size() != 4 || shape[1] != per_channel.size(0)) {
    throw DimensionError("expand_channels: " + to_string(per_channel.shape()) + " -> " +
                         to_string(shape));
  }
  const std::size_t n = shape[0], c = shape[1], hw = shape[2] * shape[3];
  std::vector<double> out(numel_of(shape));
  const auto pv = per_channel.data();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      std::fill_n(out.begin() + (b * c + ch) * hw, hw, pv[ch]);
    }
  }
  return Tensor::make_result(shape, std::move(out), {per_channel}, [n, c, hw](Node& self) {
    auto g = self.inputs[0]->grad_buffer();
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (std::size_t i = 0; i < hw; ++i) s += self.grad[(b * c + ch) * hw + i];
        g[ch] += s;
      }
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 2, "linear input");
  require_rank(weight, 2, "linear weight");
  const std::size_t n = x.size(0), f = x.size(1), k = weight.size(0);
  if (weight.size(1) != f) {
    throw DimensionError("linear: input " + to_string(x.shape()) + " vs weight " +
                         to_string(weight.shape()));
  }
  if (bias.defined() && bias.numel() != k) throw DimensionError("linear: bias size");
  const auto xv = x.data();
  const auto wv = weight.data();
  std::vector<double> out(n * k);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t o = 0; o < k; ++o) {
      double s = bias.defined() ? bias.data()[o] : 0.0;
      for (std::size_t i = 0; i < f; ++i) s += xv[b * f + i] * wv[o * f + i];
      out[b * k + o] = s;
    }
  }
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return Tensor::make_result({n, k}, std::move(out), std::move(inputs), [n, f, k](Node& self) {
    Node& nx = *self.inputs[0];
    Node& nw = *self.inputs[1];
    if (nx.requires_grad) {
      auto g = nx.grad_buffer();
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t o = 0; o < k; ++o) {
          const double go = self.grad[b * k + o];
          for (std::size_t i = 0; i < f; ++i) g[b * f + i] += go * nw.value[o * f + i];
        }
      }
    }
    if (nw.requires_grad) {
      auto g = nw.grad_buffer();
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t o = 0; o < k; ++o) {
          const double go = self.grad[b * k + o];
          for (std::size_t i = 0; i < f; ++i) g[o * f + i] += go * nx.value[b * f + i];
        }
      }
    }
    if (self.inputs.size() > 2 && self.inputs[2]->requires_grad) {
      auto g = self.inputs[2]->grad_buffer();
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t o = 0; o < k; ++o) g[o] += self.grad[b * k + o];
      }
    }
  });
}

Tensor batch_norm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                    BatchNormState& state, bool training) {
  require_rank(input, 4, "batch_norm2d");
  const std::size_t n = input.size(0), c = input.size(1), hw = input.size(2) * input.size(3);
  if (gamma.numel() != c || beta.numel() != c) throw DimensionError("batch_norm2d: affine size");
  if (state.running_mean.size() != c) state.running_mean.assign(c, 0.0);
  if (state.running_var.size() != c) state.running_var.assign(c, 1.0);
  const std::size_t count = n * hw;
  const auto xv = input.data();

  std::vector<double> mu(c), inv_std(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    if (training) {
      if (count < 2) throw ContractError("batch_norm2d: training needs more than one value per channel");
      double s = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t i = 0; i < hw; ++i) s += xv[(b * c + ch) * hw + i];
      }
      const double m = s / static_cast<double>(count);
      double v = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t i = 0; i < hw; ++i) {
          const double d = xv[(b * c + ch) * hw + i] - m;
          v += d * d;
        }
      }
      v /= static_cast<double>(count);
      mu[ch] = m;
      inv_std[ch] = 1.0 / std::sqrt(v + state.eps);
      const double unbiased = v * static_cast<double>(count) / static_cast<double>(count - 1);
      state.running_mean[ch] = (1.0 - state.momentum) * state.running_mean[ch] + state.momentum * m;
      state.running_var[ch] =
          (1.0 - state.momentum) * state.running_var[ch] + state.momentum * unbiased;
    } else {
      mu[ch] = state.running_mean[ch];
      inv_std[ch] = 1.0 / std::sqrt(state.running_var[ch] + state.eps);
    }
  }

  auto xhat = std::make_shared<std::vector<double>>(xv.size());
  std::vector<double> out(xv.size());
  const auto gv = gamma.data();
  const auto bv = beta.data();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t i = 0; i < hw; ++i) {
        const std::size_t at = (b * c + ch) * hw + i;
        (*xhat)[at] = (xv[at] - mu[ch]) * inv_std[ch];
        out[at] = gv[ch] * (*xhat)[at] + bv[ch];
      }
    }
  }

  return Tensor::make_result(
      input.shape(), std::move(out), {input, gamma, beta},
      [n, c, hw, count, training, xhat, inv_std](Node& self) {
        Node& nx = *self.inputs[0];
        Node& ng = *self.inputs[1];
        Node& nb = *self.inputs[2];
        std::vector<double> sum_g(c, 0.0), sum_gx(c, 0.0);
        for (std::size_t b = 0; b < n; ++b) {
          for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t i = 0; i < hw; ++i) {
              const std::size_t at = (b * c + ch) * hw + i;
              sum_g[ch] += self.grad[at];
              sum_gx[ch] += self.grad[at] * (*xhat)[at];
            }
          }
        }
        if (ng.requires_grad) {
          auto g = ng.grad_buffer();
          for (std::size_t ch = 0; ch < c; ++ch) g[ch] += sum_gx[ch];
        }
        if (nb.requires_grad) {
          auto g = nb.grad_buffer();
          for (std::size_t ch = 0; ch < c; ++ch) g[ch] += sum_g[ch];
        }
        if (nx.requires_grad) {
          auto g = nx.grad_buffer();
          const double inv_count = 1.0 / static_cast<double>(count);
          for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t ch = 0; ch < c; ++ch) {
              const double scale = ng.value[ch] * inv_std[ch];
              for (std::size_t i = 0; i < hw; ++i) {
                const std::size_t at = (b * c + ch) * hw + i;
                if (training) {
                  g[at] += scale * (self.grad[at] - inv_count * sum_g[ch] -
                                    (*xhat)[at] * inv_count * sum_gx[ch]);
                } else {
                  g[at] += scale * self.grad[at];
                }
              }
            }
          }
        }
      });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels) {
  require_rank(logits, 2, "softmax_cross_entropy");
  const std::size_t n = logits.size(0), k = logits.size(1);
  if (labels.size() != n) throw DimensionError("softmax_cross_entropy: label count");
  const auto lv = logits.data();
  auto probs = std::make_shared<std::vector<double>>(n * k);
  auto y = std::make_shared<std::vector<std::int32_t>>(labels.begin(), labels.end());
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const std::int32_t label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw ContractError("softmax_cross_entropy: label out of range");
    }
    double mx = lv[b * k];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, lv[b * k + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(lv[b * k + j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < k; ++j) (*probs)[b * k + j] = std::exp(lv[b * k + j] - lse);
    total += lse - lv[b * k + static_cast<std::size_t>(label)];
  }
  return Tensor::make_result(Shape{}, {total / static_cast<double>(n)}, {logits},
                             [n, k, probs, y](Node& self) {
                               auto g = self.inputs[0]->grad_buffer();
                               const double scale = self.grad[0] / static_cast<double>(n);
                               for (std::size_t b = 0; b < n; ++b) {
                                 for (std::size_t j = 0; j < k; ++j) {
                                   const double target =
                                       static_cast<std::size_t>((*y)[b]) == j ? 1.0 : 0.0;
                                   g[b * k + j] += scale * ((*probs)[b * k + j] - target);
                                 }
                               }
                             });
}

Tensor concat_batch(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_batch: no parts");
  Shape shape = parts[0].shape();
  if (shape.empty()) throw DimensionError("concat_batch: scalar parts");
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != shape.size() || !std::equal(shape.begin() + 1, shape.end(), p.shape().begin() + 1)) {
      throw DimensionError("concat_batch: mismatched " + to_string(p.shape()));
    }
    total += p.size(0);
  }
  shape[0] = total;
  std::vector<double> out;
  out.reserve(numel_of(shape));
  std::vector<std::size_t> sizes;
  for (const Tensor& p : parts) {
    out.insert(out.end(), p.data().begin(), p.data().end());
    sizes.push_back(p.numel());
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return Tensor::make_result(std::move(shape), std::move(out), std::move(inputs),
                             [sizes](Node& self) {
                               std::size_t off = 0;
                               for (std::size_t i = 0; i < sizes.size(); ++i) {
                                 Node& in = *self.inputs[i];
                                 if (in.requires_grad) {
                                   auto g = in.grad_buffer();
                                   for (std::size_t j = 0; j < sizes[i]; ++j) g[j] += self.grad[off + j];
                                 }
                                 off += sizes[i];
                               }
                             });
}

}  // namespace nzip
