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

// Ranking metrics: top-K selection, nDCG, per-item exposure under the DCG
// examination discount, the Gini index of exposure, and Lorenz-curve export.

#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fairals/types.hpp"

namespace fairals {

struct RankedList {
  int user = -1;
  std::vector<int> items;
};

// The k best-scoring non-excluded items, descending; ties broken by ascending
// item index. Partial selection, so cost is O(|V| log k) rather than a full
// sort.
inline RankedList top_k(const Vector& scores, int k,
                        const std::vector<int>& exclusions = {}) {
  const int n = static_cast<int>(scores.size());
  if (k < 1) throw Error(fmt::format("top_k needs k >= 1 (got {})", k));
  std::vector<char> excluded(n, 0);
  int n_excluded = 0;
  for (int e : exclusions) {
    if (e < 0 || e >= n) {
      throw Error(fmt::format("excluded item {} outside catalog of {}", e, n));
    }
    if (!excluded[e]) {
      excluded[e] = 1;
      ++n_excluded;
    }
  }
  if (k > n - n_excluded) {
    throw Error(fmt::format("top_k of {} impossible: {} items minus {} excluded",
                            k, n, n_excluded));
  }
  std::vector<int> idx;
  idx.reserve(n - n_excluded);
  for (int j = 0; j < n; ++j) {
    if (!excluded[j]) idx.push_back(j);
  }
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  idx.resize(k);
  return RankedList{-1, std::move(idx)};
}

// DCG with the ideal ranking placing min(k, |relevant|) hits on top.
inline double ndcg_at_k(const RankedList& ranked,
                        const std::vector<int>& relevant, int k) {
  std::unordered_set<int> rel(relevant.begin(), relevant.end());
  if (rel.empty()) throw Error("ndcg needs a non-empty relevant set");
  double dcg = 0;
  const int depth = std::min<int>(k, static_cast<int>(ranked.items.size()));
  for (int pos = 1; pos <= depth; ++pos) {
    if (rel.count(ranked.items[pos - 1])) dcg += 1.0 / std::log2(pos + 1.0);
  }
  double idcg = 0;
  const int ideal = std::min<int>(k, static_cast<int>(rel.size()));
  for (int pos = 1; pos <= ideal; ++pos) idcg += 1.0 / std::log2(pos + 1.0);
  return dcg / idcg;
}

// Total exposure per item: rank r within the top k contributes 1/log2(r+1).
inline Vector exposure_accumulate(const std::vector<RankedList>& rankings,
                                  int n_items, int k) {
  Vector o = Vector::Zero(n_items);
  for (const RankedList& r : rankings) {
    const int depth = std::min<int>(k, static_cast<int>(r.items.size()));
    for (int pos = 1; pos <= depth; ++pos) {
      int j = r.items[pos - 1];
      if (j < 0 || j >= n_items) {
        throw Error(fmt::format("ranked item {} outside catalog of {}", j,
                                n_items));
      }
      o(j) += 1.0 / std::log2(pos + 1.0);
    }
  }
  return o;
}

// Gini index of the exposure distribution,
//   sum_j sum_l |o_j - o_l| / (2 |o|_1 |V|^2),
// computed in O(|V| log |V|) with the sorted identity
//   sum_j sum_l |o_j - o_l| = 2 sum_p (2p - n - 1) o_(p).
// The |V|^2 normalization caps the index at (|V|-1)/|V|^2; the standard flag
// divides by |V| instead, recovering the familiar [0, 1) range.
inline double gini_at_k(const Vector& o, bool standard_normalization = false) {
  const int n = static_cast<int>(o.size());
  double norm1 = 0;
  for (int j = 0; j < n; ++j) {
    if (o(j) < 0 || !std::isfinite(o(j))) {
      throw Error(fmt::format("exposure entry {} is invalid: {}", j, o(j)));
    }
    norm1 += o(j);
  }
  if (norm1 <= 0) throw Error("gini undefined for all-zero exposure");
  std::vector<double> sorted(o.data(), o.data() + n);
  std::sort(sorted.begin(), sorted.end());
  double weighted = 0;
  for (int p = 1; p <= n; ++p) {
    weighted += (2.0 * p - n - 1.0) * sorted[p - 1];
  }
  double denom = standard_normalization
                     ? norm1 * static_cast<double>(n)
                     : norm1 * static_cast<double>(n) * static_cast<double>(n);
  return weighted / denom;
}

// Cumulative exposure share over items sorted by ascending exposure, sampled
// at n_points + 1 item fractions including both endpoints. Rising quickly
// only near the right edge means a few items absorb most exposure.
inline std::vector<std::pair<double, double>> lorenz_curve(const Vector& o,
                                                           int n_points) {
  const int n = static_cast<int>(o.size());
  if (n_points < 1) {
    throw Error(fmt::format("lorenz curve needs n_points >= 1 (got {})",
                            n_points));
  }
  std::vector<double> sorted(o.data(), o.data() + n);
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0 || !std::isfinite(sorted.back())) {
    throw Error("exposure entries must be finite and non-negative");
  }
  std::vector<double> prefix(n + 1, 0.0);
  for (int p = 0; p < n; ++p) prefix[p + 1] = prefix[p] + sorted[p];
  if (prefix[n] <= 0) throw Error("lorenz curve undefined for all-zero exposure");

  std::vector<std::pair<double, double>> curve;
  curve.reserve(n_points + 1);
  for (int j = 0; j <= n_points; ++j) {
    int p = static_cast<int>(
        std::llround(static_cast<double>(j) * n / n_points));
    p = std::clamp(p, 0, n);
    curve.emplace_back(static_cast<double>(p) / n, prefix[p] / prefix[n]);
  }
  return curve;
}

}  // namespace fairals
