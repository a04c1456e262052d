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

#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "nzip/dataset.hpp"
#include "nzip/errors.hpp"
#include "test_support.hpp"

using namespace nzip;

TEST_SUITE("dataset") {

TEST_CASE("same seed gives an identical dataset") {
  const auto a = make_synthetic_dataset(5, 4, 20, 32);
  const auto b = make_synthetic_dataset(5, 4, 20, 32);
  const auto c = make_synthetic_dataset(6, 4, 20, 32);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].image == b[i].image);
    CHECK(a[i].label == b[i].label);
  }
  CHECK(!(a[0].image == c[0].image));
}

TEST_CASE("pixels lie in [0, 1] and labels are balanced") {
  const auto d = make_synthetic_dataset(1, 4, 200, 32);
  std::vector<int> counts(4, 0);
  for (const SyntheticSample& s : d) {
    CHECK(s.image.width == 32);
    for (double v : s.image.pixels) REQUIRE((v >= 0.0 && v <= 1.0));
    REQUIRE((s.label >= 0 && s.label < 4));
    ++counts[static_cast<std::size_t>(s.label)];
  }
  for (int c : counts) CHECK(c == 50);
  CHECK(labels_of(d).size() == 200);
  CHECK(images_of(d)[3].pixels == d[3].image.pixels);
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(make_synthetic_dataset(0, 1, 10, 32), ContractError);
  CHECK_THROWS_AS(make_synthetic_dataset(0, 4, 10, 4), ContractError);
}

TEST_CASE("flat images are constant") {
  const Image f = flat_image(8, 4, 0.5);
  CHECK(f.pixels.size() == 96);
  for (double v : f.pixels) CHECK(v == 0.5);
}

TEST_CASE("a 3-nearest-neighbour classifier on raw pixels beats 60%") {
  const auto train = make_synthetic_dataset(11, 4, 600, 32);
  const auto test = make_synthetic_dataset(12, 4, 200, 32);
  std::size_t hits = 0;
  for (const SyntheticSample& q : test) {
    std::vector<std::pair<double, std::int32_t>> dist;
    dist.reserve(train.size());
    for (const SyntheticSample& t : train) {
      double d = 0.0;
      for (std::size_t i = 0; i < q.image.pixels.size(); ++i) d += std::pow(q.image.pixels[i] - t.image.pixels[i], 2);
      dist.emplace_back(d, t.label);
    }
    std::partial_sort(dist.begin(), dist.begin() + 3, dist.end());
    std::vector<int> votes(4, 0);
    for (int k = 0; k < 3; ++k) ++votes[static_cast<std::size_t>(dist[k].second)];
    // Ties go to the nearest neighbour's class.
    int best = dist[0].second;
    for (int c = 0; c < 4; ++c) {
      if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    }
    hits += best == q.label;
  }
  const double acc = double(hits) / double(test.size());
  CAPTURE(acc);
  CHECK(acc > 0.6);
}

}  // TEST_SUITE
