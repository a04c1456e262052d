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

#include "nzip/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nzip/errors.hpp"
#include "nzip/rng.hpp"

namespace nzip {

namespace {

constexpr std::size_t kFamilies = 8;
// Share of the class hue in the texture color; the rest is a random color.
// Texture, not color, should carry most of the label.
constexpr double kTintStrength = 0.4;

// Texture intensity in [0, 1] at rectangle-local coordinates (u, v).
double texture(std::size_t family, double u, double v, double period, double phase) {
  const double tau = 2.0 * std::numbers::pi;
  auto wave = [&](double t) { return 0.5 + 0.5 * std::sin(tau * t / period + phase); };
  auto square = [&](double t) { return std::fmod(std::floor(t / (0.5 * period) + phase), 2.0) == 0.0 ? 1.0 : 0.0; };
  switch (family) {
    case 0: return square(v);                                          // horizontal stripes
    case 1: return square(u);                                          // vertical stripes
    case 2: return std::abs(square(u) - square(v));                    // checks
    case 3: {                                                          // dots
      const double du = std::fmod(u + phase * period, period) - 0.5 * period;
      const double dv = std::fmod(v + phase * period, period) - 0.5 * period;
      return std::hypot(du, dv) < 0.3 * period ? 1.0 : 0.0;
    }
    case 4: return wave((u + v) / std::numbers::sqrt2);                // diagonal
    case 5: return wave((u - v) / std::numbers::sqrt2);                // anti-diagonal
    case 6: return wave(std::hypot(u, v));                             // rings
    default: return wave(u) * wave(v);                                 // soft grid
  }
}

// Class palette: evenly spaced hues.
void class_color(std::size_t k, std::size_t num_classes, double rgb[3]) {
  const double h = 6.0 * static_cast<double>(k) / static_cast<double>(num_classes);
  for (int c = 0; c < 3; ++c) {
    const double d = std::fmod(h + 4.0 - 2.0 * c, 6.0);
    rgb[c] = std::clamp(std::abs(d - 3.0) - 1.0, 0.0, 1.0);
  }
}

}  // namespace

std::vector<SyntheticSample> make_synthetic_dataset(std::uint64_t seed, std::size_t num_classes,
                                                    std::size_t count, std::size_t size) {
  if (num_classes < 2) throw ContractError("synthetic dataset needs at least 2 classes");
  if (size < 8) throw ContractError("synthetic images must be at least 8x8");
  Rng rng(seed);
  std::vector<SyntheticSample> out;
  out.reserve(count);
  const double n = static_cast<double>(size);
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticSample s;
    s.label = static_cast<std::int32_t>(i % num_classes);
    s.image = Image(size, size);
    const std::size_t k = static_cast<std::size_t>(s.label);
    const std::size_t family = k % kFamilies;
    // Classes beyond the family count reuse a family at a different scale.
    const double scale = 1.0 + static_cast<double>(k / kFamilies);

    double bg0[3], bg1[3], tint[3];
    for (double& c : bg0) c = rng.uniform(0.15, 0.85);
    for (double& c : bg1) c = rng.uniform(0.15, 0.85);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double gx = std::cos(angle), gy = std::sin(angle);

    class_color(k, num_classes, tint);
    for (double& c : tint) c = std::clamp(kTintStrength * c + (1.0 - kTintStrength) * rng.uniform(0.0, 1.0), 0.0, 1.0);

    const std::size_t rw = static_cast<std::size_t>(std::round(n * rng.uniform(0.6, 0.9)));
    const std::size_t rh = static_cast<std::size_t>(std::round(n * rng.uniform(0.6, 0.9)));
    const std::size_t x0 = static_cast<std::size_t>(rng.below(size - rw + 1));
    const std::size_t y0 = static_cast<std::size_t>(rng.below(size - rh + 1));
    const double period = scale * rng.uniform(4.0, 7.0) * n / 32.0;
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double contrast = rng.uniform(0.6, 0.9);

    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const double t = ((static_cast<double>(x) / n - 0.5) * gx + (static_cast<double>(y) / n - 0.5) * gy) + 0.5;
        const bool inside = x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh;
        const double tex = inside ? texture(family, static_cast<double>(x - x0), static_cast<double>(y - y0),
                                            period, phase)
                                  : 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
          double v = bg0[c] + (bg1[c] - bg0[c]) * std::clamp(t, 0.0, 1.0);
          if (inside) v = tint[c] * (1.0 - contrast + contrast * tex);
          v += 0.02 * rng.normal();
          s.image.at(c, y, x) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

Image flat_image(std::size_t width, std::size_t height, double level) { return Image(width, height, level); }

std::vector<std::int32_t> labels_of(std::span<const SyntheticSample> samples) {
  std::vector<std::int32_t> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

std::vector<Image> images_of(std::span<const SyntheticSample> samples) {
  std::vector<Image> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.image);
  return out;
}

}  // namespace nzip
