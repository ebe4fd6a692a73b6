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

// Fold-in evaluation on holdout users. Each user's embedding is rebuilt from
// their fold-in items against the frozen item matrix, the catalog is ranked
// with fold-in items excluded, and the ranking is scored against the target
// items. A user is skipped at cutoff k when their target set is empty or
// fewer than k candidates remain after exclusion.

#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "fairals/feedback.hpp"
#include "fairals/ials.hpp"
#include "fairals/metrics.hpp"
#include "fairals/parallel.hpp"

namespace fairals {

struct EvalOptions {
  std::vector<int> k_values = {10};
  int threads = 1;
};

struct KMetrics {
  int k = 0;
  double ndcg = 0;
  double gini = 0;
  long long users_evaluated = 0;
  long long users_skipped = 0;
};

struct HoldoutEvaluation {
  std::vector<KMetrics> per_k;
  // Item exposure totals at each cutoff, parallel to per_k. Kept so Lorenz
  // curves can be drawn from the same pass that produced the Gini values.
  std::vector<Vector> exposure;
};

// The fold-in embedding uses the same frequency-scaled regularizer as
// training, with the user's mass taken from their fold-in count.
inline double foldin_lambda(std::size_t foldin_count, int n_items,
                            const IalsHyperParams& hp) {
  double mass =
      static_cast<double>(foldin_count) + hp.alpha0 * static_cast<double>(n_items);
  return hp.lambda_l2 * std::pow(mass, hp.eta);
}

inline HoldoutEvaluation evaluate_holdout(const std::vector<HoldoutUser>& users,
                                          const EmbeddingMatrix& v,
                                          const IalsHyperParams& hp,
                                          const EvalOptions& opts) {
  const int n_items = static_cast<int>(v.rows());
  if (n_items < 1) throw ConfigError("evaluation needs a non-empty item matrix");
  std::vector<int> ks = opts.k_values;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty()) throw ConfigError("evaluation needs at least one cutoff k");
  for (int k : ks) {
    if (k < 1) throw ConfigError(fmt::format("cutoff k must be >= 1 (got {})", k));
    if (k > n_items) {
      throw ConfigError(
          fmt::format("cutoff k={} exceeds the catalog of {} items", k, n_items));
    }
  }
  const int k_max = ks.back();
  for (const HoldoutUser& hu : users) {
    for (int j : hu.foldin) {
      if (j < 0 || j >= n_items) {
        throw Error(fmt::format("fold-in item {} out of range for user {}", j,
                                hu.id));
      }
    }
    for (int j : hu.target) {
      if (j < 0 || j >= n_items) {
        throw Error(
            fmt::format("target item {} out of range for user {}", j, hu.id));
      }
    }
  }

  Matrix g_v = gramian(v, opts.threads);
  const int n_users = static_cast<int>(users.size());
  std::vector<RankedList> ranked(n_users);
  std::vector<int> avail(n_users, 0);
  std::vector<char> scored(n_users, 0);
  parallel_rows(n_users, opts.threads, [&](int i) {
    const HoldoutUser& hu = users[i];
    avail[i] = n_items - static_cast<int>(hu.foldin.size());
    if (hu.target.empty() || avail[i] < 1) return;
    double lambda = foldin_lambda(hu.foldin.size(), n_items, hp);
    Vector u = solve_user_row(hu.foldin, v, g_v, hp.alpha0, lambda);
    Vector scores = v * u;
    ranked[i] = top_k(scores, std::min(k_max, avail[i]), hu.foldin);
    ranked[i].user = i;
    scored[i] = 1;
  });

  HoldoutEvaluation out;
  for (int k : ks) {
    KMetrics km;
    km.k = k;
    double ndcg_sum = 0;
    std::vector<RankedList> at_k;
    for (int i = 0; i < n_users; ++i) {
      if (!scored[i] || avail[i] < k) {
        ++km.users_skipped;
        continue;
      }
      ndcg_sum += ndcg_at_k(ranked[i], users[i].target, k);
      at_k.push_back(ranked[i]);
      ++km.users_evaluated;
    }
    if (km.users_evaluated == 0) {
      throw Error(fmt::format("no users evaluable at k={}", k));
    }
    km.ndcg = ndcg_sum / static_cast<double>(km.users_evaluated);
    Vector o = exposure_accumulate(at_k, n_items, k);
    km.gini = gini_at_k(o);
    out.per_k.push_back(km);
    out.exposure.push_back(std::move(o));
  }
  return out;
}

inline constexpr const char* kMetricsHeader =
    "k\tndcg\tgini\tusers_evaluated\tusers_skipped";

inline void write_metrics(const std::string& path,
                          const std::vector<KMetrics>& per_k) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write metrics file: " + path);
  out << kMetricsHeader << "\n";
  for (const KMetrics& km : per_k) {
    out << fmt::format("{}\t{}\t{}\t{}\t{}\n", km.k, format_double(km.ndcg),
                       format_double(km.gini), km.users_evaluated,
                       km.users_skipped);
  }
  if (!out) throw Error("write failed for metrics file: " + path);
}

}  // namespace fairals
