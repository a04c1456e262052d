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
#include <span>
#include <vector>

#include "nzip/entropy_model.hpp"

namespace nzip {

// Multi-symbol range coder over 64-bit low/range registers.
//
// Frequencies are integer counts out of 2^precision. After every symbol the
// range is renormalized a byte at a time until it is at least 2^56, so with
// precision P the range never drops below 2^(56-P) between renormalizations.
// A carry out of `low` is propagated into the bytes already written. The
// final flush writes a single byte; the decoder reads zeros past the end.
class RangeEncoder {
 public:
  explicit RangeEncoder(int precision);

  // Encodes the half-open count interval [cum, cum + freq).
  void encode(std::uint32_t cum, std::uint32_t freq);
  std::vector<std::uint8_t> finish();

 private:
  void propagate_carry();

  int precision_;
  std::uint64_t low_ = 0;
  std::uint64_t range_ = ~std::uint64_t{0};
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  RangeDecoder(std::span<const std::uint8_t> data, int precision);

  // Count value in [0, 2^precision) identifying the next symbol.
  std::uint32_t target();
  // Consumes the symbol whose interval is [cum, cum + freq).
  void consume(std::uint32_t cum, std::uint32_t freq);
  // Throws DecodeError unless exactly the encoder's bytes were consumed.
  void finish() const;

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> data_;
  int precision_;
  std::size_t pos_ = 0;
  std::uint64_t code_ = 0;  // offset of the code value above low
  std::uint64_t range_ = ~std::uint64_t{0};
  std::uint64_t step_ = 0;
};

// Codes symbols[i] with row i of the table. Throws ContractError when a
// symbol lies outside its window.
std::vector<std::uint8_t> encode_symbols(std::span<const std::int32_t> symbols, const CdfTable& tables);

// Inverse of encode_symbols for the first n rows of the table. A stream that
// was produced with different tables is not detectable in general and
// decodes to garbage; truncation and trailing bytes raise DecodeError.
std::vector<std::int32_t> decode_symbols(std::span<const std::uint8_t> data, const CdfTable& tables,
                                         std::size_t n);

}  // namespace nzip
