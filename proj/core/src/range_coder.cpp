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

#include "nzip/range_coder.hpp"

#include <algorithm>
#include <string>

#include "nzip/errors.hpp"

namespace nzip {

namespace {
constexpr std::uint64_t kTop = std::uint64_t{1} << 56;
constexpr std::size_t kCodeBytes = 8;
}  // namespace

RangeEncoder::RangeEncoder(int precision) : precision_(precision) {
  if (precision < 1 || precision > 24) throw ContractError("range coder precision out of range");
}

void RangeEncoder::propagate_carry() {
  for (auto it = out_.rbegin(); it != out_.rend(); ++it) {
    if (++*it != 0) return;
  }
}

void RangeEncoder::encode(std::uint32_t cum, std::uint32_t freq) {
  const std::uint64_t total = std::uint64_t{1} << precision_;
  if (freq == 0 || cum + static_cast<std::uint64_t>(freq) > total) {
    throw ContractError("range coder: empty or out-of-range interval");
  }
  const std::uint64_t step = range_ >> precision_;
  const std::uint64_t start = step * cum;
  const std::uint64_t old = low_;
  low_ += start;
  if (low_ < old) propagate_carry();
  // The last symbol absorbs the truncation remainder.
  range_ = cum + static_cast<std::uint64_t>(freq) == total ? range_ - start : step * freq;
  while (range_ < kTop) {
    out_.push_back(static_cast<std::uint8_t>(low_ >> 56));
    low_ <<= 8;
    range_ <<= 8;
  }
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  // range_ >= 2^56, so the first multiple of 2^56 at or above low_ lies
  // inside [low_, low_ + range_) and one byte identifies it.
  const std::uint64_t mask = kTop - 1;
  const std::uint64_t old = low_;
  const std::uint64_t value = (low_ + mask) & ~mask;
  if (value < old) propagate_carry();
  out_.push_back(static_cast<std::uint8_t>(value >> 56));
  low_ = 0;
  range_ = ~std::uint64_t{0};
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> data, int precision)
    : data_(data), precision_(precision) {
  if (precision < 1 || precision > 24) throw ContractError("range coder precision out of range");
  for (std::size_t i = 0; i < kCodeBytes; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  // Past the end the stream is implicitly zero-padded, up to the width of
  // the code register.
  if (pos_ >= data_.size() + kCodeBytes - 1) throw DecodeError("range coder: truncated stream");
  const std::uint8_t b = pos_ < data_.size() ? data_[pos_] : 0;
  ++pos_;
  return b;
}

std::uint32_t RangeDecoder::target() {
  step_ = range_ >> precision_;
  const std::uint64_t t = code_ / step_;
  const std::uint64_t last = (std::uint64_t{1} << precision_) - 1;
  return static_cast<std::uint32_t>(std::min(t, last));
}

void RangeDecoder::consume(std::uint32_t cum, std::uint32_t freq) {
  const std::uint64_t total = std::uint64_t{1} << precision_;
  const std::uint64_t start = step_ * cum;
  if (start > code_) throw DecodeError("range coder: inconsistent stream");
  code_ -= start;
  range_ = cum + static_cast<std::uint64_t>(freq) == total ? range_ - start : step_ * freq;
  if (code_ >= range_) throw DecodeError("range coder: inconsistent stream");
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

void RangeDecoder::finish() const {
  // The decoder always runs kCodeBytes - 1 bytes ahead of the encoder.
  if (pos_ != data_.size() + kCodeBytes - 1) {
    throw DecodeError("range coder: stream length does not match the decoded symbols (" +
                      std::to_string(data_.size()) + " bytes)");
  }
}

std::vector<std::uint8_t> encode_symbols(std::span<const std::int32_t> symbols, const CdfTable& tables) {
  if (symbols.size() > tables.size()) {
    throw ContractError("encode_symbols: more symbols than table rows");
  }
  if (symbols.empty()) return {};
  RangeEncoder enc(tables.precision());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const std::int32_t s = symbols[i];
    if (s < tables.lo(i) || s > tables.hi(i)) {
      throw ContractError("encode_symbols: symbol " + std::to_string(s) + " outside window [" +
                          std::to_string(tables.lo(i)) + ", " + std::to_string(tables.hi(i)) +
                          "] at element " + std::to_string(i));
    }
    const auto cdf = tables.cdf(i);
    const auto k = static_cast<std::size_t>(s - tables.lo(i));
    enc.encode(cdf[k], cdf[k + 1] - cdf[k]);
  }
  return enc.finish();
}

std::vector<std::int32_t> decode_symbols(std::span<const std::uint8_t> data, const CdfTable& tables,
                                         std::size_t n) {
  if (n > tables.size()) throw ContractError("decode_symbols: more symbols than table rows");
  std::vector<std::int32_t> out;
  if (n == 0) {
    if (!data.empty()) throw DecodeError("decode_symbols: payload for an empty sequence");
    return out;
  }
  if (data.empty()) throw DecodeError("decode_symbols: empty payload");
  out.reserve(n);
  RangeDecoder dec(data, tables.precision());
  for (std::size_t i = 0; i < n; ++i) {
    const auto cdf = tables.cdf(i);
    const std::uint32_t t = dec.target();
    // Largest k with cdf[k] <= t.
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), t);
    const auto k = static_cast<std::size_t>(it - cdf.begin()) - 1;
    dec.consume(cdf[k], cdf[k + 1] - cdf[k]);
    out.push_back(tables.lo(i) + static_cast<std::int32_t>(k));
  }
  dec.finish();
  return out;
}

}  // namespace nzip
