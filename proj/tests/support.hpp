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

// Shared test fixtures: synthetic data generators and temp-dir handling.

#pragma once

#include <fmt/core.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairals/feedback.hpp"

namespace testsup {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = (std::filesystem::temp_directory_path() /
             fmt::format("fairals_{}_{}_{}", tag, ::getpid(), counter++))
                .string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

// Random binary interaction set: each user draws `per_user` distinct items
// uniformly. Ids are zero-padded so lexicographic order equals numeric order.
inline std::vector<fairals::InteractionTriple> uniform_triples(
    int n_users, int n_items, int per_user, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<fairals::InteractionTriple> triples;
  std::uniform_int_distribution<int> pick(0, n_items - 1);
  for (int u = 0; u < n_users; ++u) {
    std::set<int> items;
    while (static_cast<int>(items.size()) < per_user) items.insert(pick(rng));
    for (int j : items) {
      triples.push_back({fmt::format("u{:05d}", u), fmt::format("i{:05d}", j), 1.0});
    }
  }
  return triples;
}

// Popularity-skewed interactions: item j is drawn with probability
// proportional to 1/(j+1)^zipf. Head items soak up most of the exposure,
// which is the regime the exposure regularizer is meant to flatten.
inline std::vector<fairals::InteractionTriple> zipf_triples(
    int n_users, int n_items, int per_user, double zipf, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> weights(n_items);
  for (int j = 0; j < n_items; ++j) weights[j] = 1.0 / std::pow(j + 1.0, zipf);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<fairals::InteractionTriple> triples;
  for (int u = 0; u < n_users; ++u) {
    std::set<int> items;
    int guard = 0;
    while (static_cast<int>(items.size()) < per_user && ++guard < 100000) {
      items.insert(pick(rng));
    }
    for (int j : items) {
      triples.push_back({fmt::format("u{:05d}", u), fmt::format("i{:05d}", j), 1.0});
    }
  }
  return triples;
}

// Builds a FeedbackMatrix directly from index pairs.
inline fairals::FeedbackMatrix matrix_from_pairs(
    int n_users, int n_items, const std::vector<std::pair<int, int>>& pairs) {
  fairals::FeedbackMatrix m;
  m.n_users = n_users;
  m.n_items = n_items;
  m.by_user.assign(n_users, {});
  m.by_item.assign(n_items, {});
  std::set<std::pair<int, int>> dedup(pairs.begin(), pairs.end());
  for (const auto& [u, j] : dedup) {
    m.by_user[u].push_back(j);
    m.by_item[j].push_back(u);
  }
  m.nnz = static_cast<long long>(dedup.size());
  return m;
}

// Random binary matrix with density p (at least one interaction per user and
// per item so Tikhonov weights stay informative).
inline fairals::FeedbackMatrix random_matrix(int n_users, int n_items, double p,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> pick_item(0, n_items - 1);
  std::uniform_int_distribution<int> pick_user(0, n_users - 1);
  std::vector<std::pair<int, int>> pairs;
  std::set<int> seen_items;
  for (int u = 0; u < n_users; ++u) {
    bool any = false;
    for (int j = 0; j < n_items; ++j) {
      if (unif(rng) < p) {
        pairs.emplace_back(u, j);
        seen_items.insert(j);
        any = true;
      }
    }
    if (!any) {
      int j = pick_item(rng);
      pairs.emplace_back(u, j);
      seen_items.insert(j);
    }
  }
  for (int j = 0; j < n_items; ++j) {
    if (!seen_items.count(j)) pairs.emplace_back(pick_user(rng), j);
  }
  return matrix_from_pairs(n_users, n_items, pairs);
}

}  // namespace testsup
