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

// Convolution kernels lower to im2col + GEMM; the GEMM runs through Eigen.
// Columns of all batch items sit side by side so each layer issues a single
// large product, which matters for the small spatial grids of the latent.

#include <Eigen/Core>
#include <algorithm>
#include <memory>
#include <span>

#include "nzip/errors.hpp"
#include "nzip/ops.hpp"

namespace nzip {

namespace {

using detail::Node;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

Eigen::Index ei(std::size_t v) { return static_cast<Eigen::Index>(v); }

struct Geometry {
  std::size_t channels, height, width;   // image side
  std::size_t kernel, stride, padding;
  std::size_t out_h, out_w;              // column side (conv output grid)
};

// image [C,H,W] -> columns [C*k*k, out_h*out_w], rows `ld` apart
void im2col(const double* image, const Geometry& g, double* cols, std::size_t ld) {
  const std::size_t kk = g.kernel * g.kernel;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        double* row = cols + (c * kk + ky * g.kernel + kx) * ld;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(g.height) &&
                                ix < static_cast<long>(g.width);
            row[oy * g.out_w + ox] =
                inside ? image[(c * g.height + static_cast<std::size_t>(iy)) * g.width +
                               static_cast<std::size_t>(ix)]
                       : 0.0;
          }
        }
      }
    }
  }
}

// Scatter-add of columns back onto image [C,H,W]; adjoint of im2col.
void col2im(const double* cols, const Geometry& g, double* image, std::size_t ld) {
  const std::size_t kk = g.kernel * g.kernel;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const double* row = cols + (c * kk + ky * g.kernel + kx) * ld;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
          if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
            if (ix < 0 || ix >= static_cast<long>(g.width)) continue;
            image[(c * g.height + static_cast<std::size_t>(iy)) * g.width +
                  static_cast<std::size_t>(ix)] += row[oy * g.out_w + ox];
          }
        }
      }
    }
  }
}

// [N, C, P] <-> [C, N*P]
void batch_to_wide(const double* src, std::size_t n, std::size_t c, std::size_t p, double* dst) {
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* s = src + (b * c + ch) * p;
      std::copy(s, s + p, dst + ch * n * p + b * p);
    }
  }
}

void wide_to_batch(const double* src, std::size_t n, std::size_t c, std::size_t p, double* dst) {
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* s = src + ch * n * p + b * p;
      std::copy(s, s + p, dst + (b * c + ch) * p);
    }
  }
}

void add_bias(double* out, std::size_t n, std::size_t c, std::size_t plane, std::span<const double> bias) {
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* p = out + (b * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] += bias[ch];
    }
  }
}

void bias_grad(const Node& self, std::size_t n, std::size_t c, std::size_t plane) {
  if (self.inputs.size() < 3 || !self.inputs[2]->requires_grad) return;
  auto gb = self.inputs[2]->grad_buffer();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* g = self.grad.data() + (b * c + ch) * plane;
      double s = 0.0;
      for (std::size_t i = 0; i < plane; ++i) s += g[i];
      gb[ch] += s;
    }
  }
}

void check_conv_args(const Tensor& input, const Tensor& weight, const Tensor& bias,
                     std::size_t bias_channels, std::size_t input_channel_axis_expect,
                     std::size_t stride, const char* name) {
  if (input.rank() != 4) {
    throw DimensionError(std::string(name) + ": input must be NxCxHxW, got " +
                         to_string(input.shape()));
  }
  if (weight.rank() != 4 || weight.size(2) != weight.size(3)) {
    throw DimensionError(std::string(name) + ": weight must be OxCxkxk, got " +
                         to_string(weight.shape()));
  }
  if (input.size(1) != input_channel_axis_expect) {
    throw DimensionError(std::string(name) + ": input channels " + std::to_string(input.size(1)) +
                         " do not match weight " + to_string(weight.shape()));
  }
  if (bias.defined() && bias.numel() != bias_channels) {
    throw DimensionError(std::string(name) + ": bias size mismatch");
  }
  if (stride < 1) throw ContractError(std::string(name) + ": stride must be >= 1");
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
  check_conv_args(input, weight, bias, weight.rank() == 4 ? weight.size(0) : 0,
                  weight.rank() == 4 ? weight.size(1) : 0, stride, "conv2d");
  const std::size_t n = input.size(0), c = input.size(1), h = input.size(2), w = input.size(3);
  const std::size_t o = weight.size(0), k = weight.size(2);
  if (h + 2 * padding < k || w + 2 * padding < k) {
    throw DimensionError("conv2d: kernel larger than padded input " + to_string(input.shape()));
  }
  Geometry g{c, h, w, k, stride, padding, (h + 2 * padding - k) / stride + 1,
             (w + 2 * padding - k) / stride + 1};
  const std::size_t rows = c * k * k, positions = g.out_h * g.out_w, wide = n * positions;

  // Columns [rows, N*P] are kept for the weight gradient.
  auto cols = std::make_shared<std::vector<double>>(rows * wide);
  for (std::size_t b = 0; b < n; ++b) {
    im2col(input.data().data() + b * c * h * w, g, cols->data() + b * positions, wide);
  }
  std::vector<double> prod(o * wide);
  MatMap(prod.data(), ei(o), ei(wide)).noalias() =
      ConstMatMap(weight.data().data(), ei(o), ei(rows)) * ConstMatMap(cols->data(), ei(rows), ei(wide));
  std::vector<double> out(n * o * positions);
  wide_to_batch(prod.data(), n, o, positions, out.data());
  if (bias.defined()) add_bias(out.data(), n, o, positions, bias.data());

  std::vector<Tensor> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return Tensor::make_result(
      {n, o, g.out_h, g.out_w}, std::move(out), std::move(inputs),
      [g, n, o, rows, positions, wide, cols](Node& self) {
        Node& nx = *self.inputs[0];
        Node& nw = *self.inputs[1];
        std::vector<double> go(o * wide);
        batch_to_wide(self.grad.data(), n, o, positions, go.data());
        ConstMatMap gom(go.data(), ei(o), ei(wide));
        if (nw.requires_grad) {
          MatMap(nw.grad_buffer().data(), ei(o), ei(rows)).noalias() +=
              gom * ConstMatMap(cols->data(), ei(rows), ei(wide)).transpose();
        }
        if (nx.requires_grad) {
          std::vector<double> dcol(rows * wide);
          MatMap(dcol.data(), ei(rows), ei(wide)).noalias() =
              ConstMatMap(nw.value.data(), ei(o), ei(rows)).transpose() * gom;
          const std::size_t image_size = g.channels * g.height * g.width;
          auto gx = nx.grad_buffer();
          for (std::size_t b = 0; b < n; ++b) {
            col2im(dcol.data() + b * positions, g, gx.data() + b * image_size, wide);
          }
        }
        bias_grad(self, n, o, positions);
      });
}

Tensor conv2d_transposed(const Tensor& input, const Tensor& weight, const Tensor& bias,
                         std::size_t stride, std::size_t padding, std::size_t output_padding) {
  check_conv_args(input, weight, bias, weight.rank() == 4 ? weight.size(1) : 0,
                  weight.rank() == 4 ? weight.size(0) : 0, stride, "conv2d_transposed");
  if (output_padding >= stride && output_padding > 0) {
    throw ContractError("conv2d_transposed: output_padding must be smaller than stride");
  }
  const std::size_t n = input.size(0), o = input.size(1), h = input.size(2), w = input.size(3);
  const std::size_t c = weight.size(1), k = weight.size(2);
  const long oh = static_cast<long>((h - 1) * stride + k + output_padding) - 2 * static_cast<long>(padding);
  const long ow = static_cast<long>((w - 1) * stride + k + output_padding) - 2 * static_cast<long>(padding);
  if (h == 0 || w == 0 || oh <= 0 || ow <= 0) {
    throw DimensionError("conv2d_transposed: empty output for " + to_string(input.shape()));
  }
  // The output image plays the role of conv2d's input; the input grid is the column grid.
  Geometry g{c, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow), k, stride, padding, h, w};
  const std::size_t rows = c * k * k, positions = h * w, wide = n * positions;
  const std::size_t image_size = c * g.height * g.width;

  auto in_wide = std::make_shared<std::vector<double>>(o * wide);
  batch_to_wide(input.data().data(), n, o, positions, in_wide->data());
  std::vector<double> cols(rows * wide);
  MatMap(cols.data(), ei(rows), ei(wide)).noalias() =
      ConstMatMap(weight.data().data(), ei(o), ei(rows)).transpose() *
      ConstMatMap(in_wide->data(), ei(o), ei(wide));
  std::vector<double> out(n * image_size, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    col2im(cols.data() + b * positions, g, out.data() + b * image_size, wide);
  }
  if (bias.defined()) add_bias(out.data(), n, c, g.height * g.width, bias.data());

  std::vector<Tensor> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return Tensor::make_result(
      {n, c, g.height, g.width}, std::move(out), std::move(inputs),
      [g, n, o, c, rows, positions, wide, image_size, in_wide](Node& self) {
        Node& nx = *self.inputs[0];
        Node& nw = *self.inputs[1];
        std::vector<double> gcols(rows * wide);
        for (std::size_t b = 0; b < n; ++b) {
          im2col(self.grad.data() + b * image_size, g, gcols.data() + b * positions, wide);
        }
        ConstMatMap gc(gcols.data(), ei(rows), ei(wide));
        if (nx.requires_grad) {
          std::vector<double> gx(o * wide);
          MatMap(gx.data(), ei(o), ei(wide)).noalias() = ConstMatMap(nw.value.data(), ei(o), ei(rows)) * gc;
          std::vector<double> gx_batch(n * o * positions);
          wide_to_batch(gx.data(), n, o, positions, gx_batch.data());
          auto dst = nx.grad_buffer();
          for (std::size_t i = 0; i < gx_batch.size(); ++i) dst[i] += gx_batch[i];
        }
        if (nw.requires_grad) {
          MatMap(nw.grad_buffer().data(), ei(o), ei(rows)).noalias() +=
              ConstMatMap(in_wide->data(), ei(o), ei(wide)) * gc.transpose();
        }
        bias_grad(self, n, c, g.height * g.width);
      });
}

namespace {

// Source index in the [N, C*r*r, H, W] tensor for each element of [N, C, rH, rW].
std::shared_ptr<std::vector<std::size_t>> shuffle_map(std::size_t n, std::size_t c, std::size_t h,
                                                      std::size_t w, std::size_t r) {
  auto map = std::make_shared<std::vector<std::size_t>>(n * c * h * w * r * r);
  const std::size_t oh = h * r, ow = w * r;
  std::size_t at = 0;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
          const std::size_t src_c = ch * r * r + (y % r) * r + (x % r);
          (*map)[at++] = ((b * c * r * r + src_c) * h + y / r) * w + x / r;
        }
      }
    }
  }
  return map;
}

}  // namespace

Tensor pixel_shuffle(const Tensor& input, std::size_t r) {
  if (input.rank() != 4) throw DimensionError("pixel_shuffle expects NxCxHxW");
  if (r == 0 || input.size(1) % (r * r) != 0) {
    throw DimensionError("pixel_shuffle: channels " + std::to_string(input.size(1)) +
                         " not divisible by r^2 = " + std::to_string(r * r));
  }
  const std::size_t n = input.size(0), c = input.size(1) / (r * r), h = input.size(2), w = input.size(3);
  auto map = shuffle_map(n, c, h, w, r);
  std::vector<double> out(map->size());
  const auto iv = input.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = iv[(*map)[i]];
  return Tensor::make_result({n, c, h * r, w * r}, std::move(out), {input}, [map](Node& self) {
    auto g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < map->size(); ++i) g[(*map)[i]] += self.grad[i];
  });
}

Tensor pixel_unshuffle(const Tensor& input, std::size_t r) {
  if (input.rank() != 4) throw DimensionError("pixel_unshuffle expects NxCxHxW");
  if (r == 0 || input.size(2) % r != 0 || input.size(3) % r != 0) {
    throw DimensionError("pixel_unshuffle: spatial size not divisible by " + std::to_string(r));
  }
  const std::size_t n = input.size(0), c = input.size(1), h = input.size(2) / r, w = input.size(3) / r;
  auto map = shuffle_map(n, c, h, w, r);
  std::vector<double> out(map->size());
  const auto iv = input.data();
  for (std::size_t i = 0; i < map->size(); ++i) out[(*map)[i]] = iv[i];
  return Tensor::make_result({n, c * r * r, h, w}, std::move(out), {input}, [map](Node& self) {
    auto g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < map->size(); ++i) g[i] += self.grad[(*map)[i]];
  });
}

}  // namespace nzip
