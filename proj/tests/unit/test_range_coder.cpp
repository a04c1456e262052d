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

#include <cmath>

#include "doctest.h"
#include "nzip/entropy_model.hpp"
#include "nzip/errors.hpp"
#include "nzip/range_coder.hpp"
#include "test_support.hpp"

using namespace nzip;
using namespace nzip::testing;

namespace {

// Random count vector with every symbol >= 1 and total 2^precision.
std::vector<std::uint32_t> random_cdf(Rng& rng, std::size_t k, int precision) {
  const std::uint32_t total = 1u << precision;
  std::vector<double> w(k);
  double sum = 0.0;
  for (double& x : w) sum += (x = std::pow(rng.uniform(), 3.0) + 1e-3);
  std::vector<std::uint32_t> counts(k, 1);
  std::uint32_t used = static_cast<std::uint32_t>(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto extra = static_cast<std::uint32_t>(std::floor(w[j] / sum * double(total - k)));
    counts[j] += extra;
    used += extra;
  }
  counts[rng.below(k)] += total - used;
  std::vector<std::uint32_t> c(k + 1, 0);
  for (std::size_t j = 0; j < k; ++j) c[j + 1] = c[j] + counts[j];
  return c;
}

struct Case {
  CdfTable table;
  std::vector<std::int32_t> symbols;
  double ideal_bits = 0.0;
};

Case random_case(Rng& rng, std::size_t n, std::size_t max_k, int precision) {
  Case c;
  c.table.set_precision(precision);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = 1 + rng.below(max_k);
    const auto cdf = random_cdf(rng, k, precision);
    const auto lo = static_cast<std::int32_t>(rng.below(41)) - 20;
    c.table.push(lo, cdf);
    // Draw from the table's own distribution so the rate is meaningful.
    const std::uint32_t u = static_cast<std::uint32_t>(rng.below(1u << precision));
    std::size_t j = 0;
    while (cdf[j + 1] <= u) ++j;
    c.symbols.push_back(lo + static_cast<std::int32_t>(j));
    c.ideal_bits -= std::log2(double(cdf[j + 1] - cdf[j]) / double(1u << precision));
  }
  return c;
}

}  // namespace

TEST_SUITE("range_coder") {

TEST_CASE("a near-certain symbol costs at most two bytes") {
  for (std::size_t k : {2u, 3u, 17u}) {
    const std::uint32_t total = 1u << 16;
    std::vector<std::uint32_t> c(k + 1);
    c[0] = 0;
    c[1] = total - static_cast<std::uint32_t>(k - 1);
    for (std::size_t j = 2; j <= k; ++j) c[j] = c[j - 1] + 1;
    CdfTable t;
    t.push(0, c);
    std::vector<std::int32_t> s{0};
    const auto bytes = encode_symbols(s, t);
    CHECK(bytes.size() <= 2);
    CHECK(decode_symbols(bytes, t, 1) == s);
  }
}

TEST_CASE("uniform 256-symbol alphabet costs eight bits per symbol") {
  std::vector<std::uint32_t> c(257);
  for (std::size_t j = 0; j <= 256; ++j) c[j] = static_cast<std::uint32_t>(j * 256);
  CdfTable t;
  Rng rng(1);
  std::vector<std::int32_t> s;
  for (int i = 0; i < 4096; ++i) {
    t.push(0, c);
    s.push_back(static_cast<std::int32_t>(rng.below(256)));
  }
  const auto bytes = encode_symbols(s, t);
  CHECK(bytes.size() >= 4096 - 16);
  CHECK(bytes.size() <= 4096 + 16);
  CHECK(decode_symbols(bytes, t, s.size()) == s);
}

TEST_CASE("empty sequence gives an empty stream") {
  CdfTable t;
  const auto bytes = encode_symbols({}, t);
  CHECK(bytes.empty());
  CHECK(decode_symbols(bytes, t, 0).empty());
}

TEST_CASE("single-symbol alphabets add no payload") {
  CdfTable t;
  const std::vector<std::uint32_t> one{0, 1u << 16};
  std::vector<std::int32_t> s;
  for (int i = 0; i < 500; ++i) {
    t.push(i - 250, one);
    s.push_back(i - 250);
  }
  const auto bytes = encode_symbols(s, t);
  CHECK(bytes.size() <= 1);
  CHECK(decode_symbols(bytes, t, s.size()) == s);
}

TEST_CASE("the worked symbol 3 under mean 4, scale 1 round-trips") {
  const std::vector<double> mu{4.0}, sigma{1.0};
  CdfTable t = build_cdf_tables(mu, sigma);
  std::vector<std::int32_t> s{3};
  CHECK(decode_symbols(encode_symbols(s, t), t, 1) == s);
}

TEST_CASE("random sequences under random tables round-trip within the rate bound") {
  Rng rng(2);
  for (int trial = 0; trial < 3000; ++trial) {
    const int precision = 8 + static_cast<int>(rng.below(17));
    const std::size_t n = rng.below(200);
    Case c = random_case(rng, n, std::min<std::size_t>(300, 1u << precision), precision);
    const auto bytes = encode_symbols(c.symbols, c.table);
    REQUIRE(decode_symbols(bytes, c.table, n) == c.symbols);
    REQUIRE(8.0 * double(bytes.size()) <= c.ideal_bits + 0.02 * double(n) + 128.0);
  }
}

TEST_CASE("long streams stay within one percent plus 128 bits") {
  Rng rng(3);
  Case c = random_case(rng, 20000, 64, 16);
  const auto bytes = encode_symbols(c.symbols, c.table);
  CHECK(8.0 * double(bytes.size()) <= 1.01 * c.ideal_bits + 128.0);
  CHECK(8.0 * double(bytes.size()) >= c.ideal_bits - 8.0);
  CHECK(decode_symbols(bytes, c.table, c.symbols.size()) == c.symbols);
}

TEST_CASE("encoding is deterministic") {
  Rng a(4), b(4);
  Case x = random_case(a, 1000, 50, 16), y = random_case(b, 1000, 50, 16);
  CHECK(encode_symbols(x.symbols, x.table) == encode_symbols(y.symbols, y.table));
}

TEST_CASE("truncated or padded streams are decode errors") {
  Rng rng(5);
  Case c = random_case(rng, 3000, 200, 16);
  const auto bytes = encode_symbols(c.symbols, c.table);
  REQUIRE(bytes.size() > 100);
  for (std::size_t cut : {1u, 2u, 7u, 50u}) {
    std::vector<std::uint8_t> shorter(bytes.begin(), bytes.end() - static_cast<std::ptrdiff_t>(cut));
    CAPTURE(cut);
    CHECK_THROWS_AS(decode_symbols(shorter, c.table, c.symbols.size()), DecodeError);
  }
  auto longer = bytes;
  longer.push_back(0x5A);
  CHECK_THROWS_AS(decode_symbols(longer, c.table, c.symbols.size()), DecodeError);
  CHECK_THROWS_AS(decode_symbols({}, c.table, c.symbols.size()), DecodeError);
}

TEST_CASE("symbols outside their window are contract violations") {
  CdfTable t;
  t.push(0, std::vector<std::uint32_t>{0, 100, 1u << 16});
  std::vector<std::int32_t> s{2};
  CHECK_THROWS_AS(encode_symbols(s, t), ContractError);
  std::vector<std::int32_t> two{0, 0};
  CHECK_THROWS_AS(encode_symbols(two, t), ContractError);
}

}  // TEST_SUITE
