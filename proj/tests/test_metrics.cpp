// Copyright 2026 The Fairals Authors.
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
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "fairals/metrics.hpp"
#include "oracles.hpp"

using fairals::RankedList;
using fairals::Vector;

namespace {

double naive_gini(const Vector& o, bool standard) {
  const int n = static_cast<int>(o.size());
  double total = 0;
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) total += std::abs(o(j) - o(l));
  }
  double denom = standard ? 2.0 * o.sum() * n : 2.0 * o.sum() * n * n;
  return total / denom;
}

std::vector<int> full_sort_top_k(const Vector& scores, int k,
                                 const std::vector<int>& exclusions) {
  std::vector<int> idx;
  for (int j = 0; j < scores.size(); ++j) {
    if (std::find(exclusions.begin(), exclusions.end(), j) == exclusions.end()) {
      idx.push_back(j);
    }
  }
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  idx.resize(k);
  return idx;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("top_k picks the largest scores in order") {
  Vector scores(3);
  scores << 0.1, 0.9, 0.5;
  RankedList r = fairals::top_k(scores, 2);
  CHECK(r.items == std::vector<int>{1, 2});
}

TEST_CASE("top_k breaks ties by ascending index") {
  Vector scores = Vector::Constant(4, 0.25);
  RankedList r = fairals::top_k(scores, 3);
  CHECK(r.items == std::vector<int>{0, 1, 2});
}

TEST_CASE("top_k matches a full-sort oracle under ties and exclusions") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> quantized(0, 9);
  for (int trial = 0; trial < 20; ++trial) {
    Vector scores(100);
    for (int j = 0; j < 100; ++j) scores(j) = quantized(rng) / 10.0;
    std::vector<int> exclusions = {3, 17, 42, 99};
    RankedList got = fairals::top_k(scores, 10, exclusions);
    CHECK(got.items == full_sort_top_k(scores, 10, exclusions));
    for (int e : exclusions) {
      CHECK(std::find(got.items.begin(), got.items.end(), e) == got.items.end());
    }
  }
}

TEST_CASE("top_k is invariant to positive monotone score transforms") {
  Vector scores = oracle::random_embeddings(1, 50, 1.0, 13).row(0).transpose();
  RankedList plain = fairals::top_k(scores, 8);
  Vector warped = scores.array().exp();
  RankedList transformed = fairals::top_k(warped, 8);
  CHECK(plain.items == transformed.items);
}

TEST_CASE("top_k rejects impossible requests") {
  Vector scores(4);
  scores << 1, 2, 3, 4;
  CHECK_THROWS_AS(fairals::top_k(scores, 0), fairals::Error);
  CHECK_THROWS_AS(fairals::top_k(scores, 5), fairals::Error);
  CHECK_THROWS_AS(fairals::top_k(scores, 4, {1, 2}), fairals::Error);
  CHECK_THROWS_AS(fairals::top_k(scores, 1, {7}), fairals::Error);
  CHECK_NOTHROW(fairals::top_k(scores, 2, {1, 2}));
}

TEST_CASE("ndcg hand cases") {
  RankedList first{0, {5, 9}};
  CHECK(fairals::ndcg_at_k(first, {5}, 1) == 1.0);

  RankedList second{0, {9, 5}};
  CHECK(fairals::ndcg_at_k(second, {5}, 2) ==
        doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-15));

  RankedList miss{0, {1, 2, 3}};
  CHECK(fairals::ndcg_at_k(miss, {7}, 3) == 0.0);
}

TEST_CASE("ndcg is one exactly when the relevant prefix is perfect") {
  RankedList r{0, {4, 2, 8, 1, 0}};
  // Three relevant items occupy the top three ranks; K exceeds them.
  CHECK(fairals::ndcg_at_k(r, {2, 4, 8}, 5) == 1.0);
  // More relevant items than K: the ideal also truncates at K.
  CHECK(fairals::ndcg_at_k(r, {4, 2, 8, 1, 0, 9}, 3) == 1.0);
}

TEST_CASE("ndcg stays within the unit interval") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> items(20);
    std::iota(items.begin(), items.end(), 0);
    std::shuffle(items.begin(), items.end(), rng);
    items.resize(10);
    std::vector<int> relevant = {0, 4, 7, 13, 19};
    double v = fairals::ndcg_at_k(RankedList{0, items}, relevant, 10);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("ndcg rejects an empty relevant set") {
  RankedList r{0, {1, 2}};
  CHECK_THROWS_AS(fairals::ndcg_at_k(r, {}, 2), fairals::Error);
}

TEST_CASE("exposure follows the examination discount") {
  std::vector<RankedList> rankings = {{0, {6, 3, 9}}};
  Vector o = fairals::exposure_accumulate(rankings, 12, 3);
  CHECK(o(6) == 1.0);
  CHECK(o(3) == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-15));
  CHECK(o(9) == 0.5);
  CHECK(o(0) == 0.0);
}

TEST_CASE("exposure adds across users and truncates at k") {
  std::vector<RankedList> rankings = {{0, {2, 5}}, {1, {5, 2}}, {2, {2, 7}}};
  Vector o = fairals::exposure_accumulate(rankings, 8, 1);
  // Only rank 1 counts at k=1.
  CHECK(o(2) == 2.0);
  CHECK(o(5) == 1.0);
  CHECK(o(7) == 0.0);
}

TEST_CASE("gini hand cases") {
  Vector uniform = Vector::Constant(4, 2.5);
  CHECK(fairals::gini_at_k(uniform) == 0.0);

  for (double c : {1.0, 3.7}) {
    Vector spike(4);
    spike << c, 0, 0, 0;
    CHECK(fairals::gini_at_k(spike) == doctest::Approx(0.1875).epsilon(1e-15));
  }

  Vector ramp(3);
  ramp << 1, 2, 3;
  CHECK(fairals::gini_at_k(ramp) == doctest::Approx(2.0 / 27.0).epsilon(1e-15));
}

TEST_CASE("gini sorted identity matches the naive double loop") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> mag(0.0, 5.0);
  for (int n : {2, 3, 10, 37, 60}) {
    Vector o(n);
    for (int j = 0; j < n; ++j) o(j) = mag(rng);
    CAPTURE(n);
    CHECK(std::abs(fairals::gini_at_k(o) - naive_gini(o, false)) <= 1e-12);
    CHECK(std::abs(fairals::gini_at_k(o, true) - naive_gini(o, true)) <= 1e-12);
  }
}

TEST_CASE("gini is scale invariant") {
  Vector o(5);
  o << 0.3, 1.9, 0.0, 2.2, 0.7;
  double base = fairals::gini_at_k(o);
  CHECK(fairals::gini_at_k(Vector(2.0 * o)) == base);
  CHECK(fairals::gini_at_k(Vector(0.37 * o)) == doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("gini rejects empty exposure") {
  Vector zero = Vector::Zero(4);
  CHECK_THROWS_AS(fairals::gini_at_k(zero), fairals::Error);
}

TEST_CASE("gini standard normalization rescales by the catalog size") {
  Vector spike(4);
  spike << 1.0, 0, 0, 0;
  // (|V|-1)/|V| instead of (|V|-1)/|V|^2.
  CHECK(fairals::gini_at_k(spike, true) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("lorenz curve of uniform exposure is the diagonal") {
  Vector o = Vector::Constant(8, 1.0);
  auto curve = fairals::lorenz_curve(o, 8);
  REQUIRE(curve.size() == 9);
  for (const auto& [frac, share] : curve) CHECK(frac == share);
}

TEST_CASE("lorenz curve of a single exposed item is a step") {
  Vector o(4);
  o << 0, 0, 3.0, 0;
  auto curve = fairals::lorenz_curve(o, 4);
  REQUIRE(curve.size() == 5);
  CHECK(curve.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(curve[3] == std::pair<double, double>{0.75, 0.0});
  CHECK(curve.back() == std::pair<double, double>{1.0, 1.0});
}

TEST_CASE("lorenz curve is monotone with non-decreasing increments") {
  Vector o = oracle::random_embeddings(1, 40, 1.0, 23).row(0).transpose();
  o = o.array().abs();
  auto curve = fairals::lorenz_curve(o, 10);
  REQUIRE(curve.size() == 11);
  CHECK(curve.front().second == 0.0);
  CHECK(curve.back().second == 1.0);
  double prev_share = 0, prev_step = 0;
  for (std::size_t p = 1; p < curve.size(); ++p) {
    double step = curve[p].second - curve[p - 1].second;
    CHECK(curve[p].second >= prev_share);
    CHECK(step >= prev_step - 1e-12);
    prev_share = curve[p].second;
    prev_step = step;
  }
}

TEST_CASE("lorenz curve validates its inputs") {
  Vector zero = Vector::Zero(3);
  CHECK_THROWS_AS(fairals::lorenz_curve(zero, 4), fairals::Error);
  Vector ok = Vector::Constant(3, 1.0);
  CHECK_THROWS_AS(fairals::lorenz_curve(ok, 0), fairals::Error);
}

}  // TEST_SUITE
