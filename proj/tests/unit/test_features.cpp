// Copyright 2026 The FeatProp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "featprop/features.hpp"

#include <cstring>
#include <limits>

#include <doctest.h>

#include "featprop/rng.hpp"
#include "test_instances.hpp"

using namespace featprop;

namespace {

ModalityFeatureSet make_set(std::vector<std::vector<double>> rows) {
  ModalityFeatureSet f;
  f.modality_id = "test";
  f.data = DenseMatrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) f.data.at(i, c) = rows[i][c];
  }
  return f;
}

bool rows_bitwise_equal(const DenseMatrix& a, const DenseMatrix& b, Index row) {
  return std::memcmp(a.values.data() + row * a.cols, b.values.data() + row * b.cols,
                     a.cols * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("sample_missing draws the exact count") {
  const auto mask = sample_missing(10, 0.5, 7);
  CHECK(mask.count_missing() == 5);
  CHECK(mask.count_known() == 5);
}

TEST_CASE("sample_missing is deterministic per (num_items, rate, seed)") {
  const auto a = sample_missing(128, 0.3, 99);
  const auto b = sample_missing(128, 0.3, 99);
  CHECK(a.known == b.known);
  const auto c = sample_missing(128, 0.3, 100);
  CHECK(a.known != c.known);
}

TEST_CASE("sample_missing at rate 0.9 leaves 10 of 100 items known") {
  for (std::uint64_t seed : {1ULL, 2ULL, 42ULL}) {
    const auto mask = sample_missing(100, 0.9, seed);
    CHECK(mask.count_missing() == 90);
    CHECK(mask.count_known() == 10);
  }
}

TEST_CASE("sample_missing rounds half up") {
  CHECK(sample_missing(10, 0.25, 1).count_missing() == 3);  // 2.5 -> 3
  CHECK(sample_missing(10, 0.14, 1).count_missing() == 1);  // 1.4 -> 1
}

TEST_CASE("sample_missing rejects rates outside (0,1)") {
  CHECK_THROWS_AS(sample_missing(10, 0.0, 1), Error);
  CHECK_THROWS_AS(sample_missing(10, 1.0, 1), Error);
  CHECK_THROWS_AS(sample_missing(10, -0.2, 1), Error);
  CHECK_THROWS_AS(sample_missing(10, 1.5, 1), Error);
  CHECK_THROWS_AS(sample_missing(0, 0.5, 1), Error);
}

TEST_CASE("sample_missing marginals are uniform across items") {
  // Over many seeds each item should go missing about rate of the time.
  const Index items = 50;
  const double rate = 0.4;
  std::vector<int> missing_count(items, 0);
  const int trials = 1000;
  for (int seed = 0; seed < trials; ++seed) {
    const auto mask = sample_missing(items, rate, static_cast<std::uint64_t>(seed));
    for (Index i = 0; i < items; ++i) {
      if (!mask.is_known(i)) missing_count[i]++;
    }
  }
  for (Index i = 0; i < items; ++i) {
    const double freq = static_cast<double>(missing_count[i]) / trials;
    CHECK(freq == doctest::Approx(rate).epsilon(0.125));  // rate +- 0.05
  }
}

TEST_CASE("blank_missing zeroes exactly the missing rows") {
  auto f = make_set({{1, 2}, {1, 2}, {1, 2}});
  MissingMask mask = MissingMask::all_known(3);

  SUBCASE("all-known mask is the identity") {
    const auto out = blank_missing(f, mask);
    CHECK(out.data.values == f.data.values);
  }
  SUBCASE("missing row becomes zero, known rows untouched") {
    mask.known[1] = 0;
    const auto out = blank_missing(f, mask);
    CHECK(out.data.row(1)[0] == 0.0);
    CHECK(out.data.row(1)[1] == 0.0);
    CHECK(rows_bitwise_equal(out.data, f.data, 0));
    CHECK(rows_bitwise_equal(out.data, f.data, 2));
  }
  SUBCASE("blanking is idempotent") {
    mask.known[0] = 0;
    const auto once = blank_missing(f, mask);
    const auto twice = blank_missing(once, mask);
    CHECK(once.data.values == twice.data.values);
  }
}

TEST_CASE("blank_missing rejects size mismatches") {
  auto f = make_set({{1, 2}, {3, 4}});
  CHECK_THROWS_AS(blank_missing(f, MissingMask::all_known(3)), Error);
}

TEST_CASE("blank_missing never alters known rows bitwise") {
  rng::Stream s(77);
  const auto f0 = testgen::random_matrix(s, 30, 5, -10.0, 10.0);
  ModalityFeatureSet f{"m", f0};
  const auto mask = testgen::random_mask(s, 30, 0.5);
  const auto out = blank_missing(f, mask);
  for (Index i = 0; i < 30; ++i) {
    if (mask.is_known(i)) CHECK(rows_bitwise_equal(out.data, f.data, i));
  }
}

TEST_CASE("known_mean averages the known rows only") {
  auto f = make_set({{1, 3}, {3, 5}, {100, 100}});
  MissingMask mask = MissingMask::all_known(3);
  mask.known[2] = 0;
  CHECK(known_mean(f, mask) == std::vector<double>{2, 4});
}

TEST_CASE("known_mean of a single known row is that row") {
  auto f = make_set({{7, 9}, {1, 1}});
  MissingMask mask{2, {1, 0}};
  CHECK(known_mean(f, mask) == std::vector<double>{7, 9});
}

TEST_CASE("known_mean of constant rows is the constant") {
  auto f = make_set({{4, 2}, {4, 2}, {4, 2}, {4, 2}});
  const auto mask = sample_missing(4, 0.5, 3);
  CHECK(known_mean(f, mask) == std::vector<double>{4, 2});
}

TEST_CASE("known_mean requires at least one known item") {
  auto f = make_set({{1, 2}});
  MissingMask mask{1, {0}};
  CHECK_THROWS_AS(known_mean(f, mask), Error);
}

TEST_CASE("bundle validation enforces unique ids and matching item counts") {
  FeatureBundle bundle;
  bundle.modalities.push_back({"visual", DenseMatrix(4, 2, 1.0)});
  bundle.modalities.push_back({"textual", DenseMatrix(4, 3, 1.0)});
  CHECK_NOTHROW(bundle.validate());

  SUBCASE("duplicate modality id") {
    bundle.modalities.push_back({"visual", DenseMatrix(4, 2, 1.0)});
    CHECK_THROWS_AS(bundle.validate(), Error);
  }
  SUBCASE("item count mismatch") {
    bundle.modalities.push_back({"audio", DenseMatrix(5, 2, 1.0)});
    CHECK_THROWS_AS(bundle.validate(), Error);
  }
  SUBCASE("non-finite values") {
    bundle.modalities[0].data.at(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bundle.validate(), Error);
  }
}
