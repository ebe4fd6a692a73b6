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

// Raw interaction ingestion: binarization, minimum-count filtering, the
// strong-generalization user split, and the dual-orientation sparse matrix.

#pragma once

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairals/types.hpp"
#include "fairals/util.hpp"

namespace fairals {

struct InteractionTriple {
  std::string user;
  std::string item;
  double rating = 1.0;
};

// Binary feedback matrix in both orientations. Index lists are sorted
// ascending, which fixes the summation order of every row solve.
struct FeedbackMatrix {
  int n_users = 0;
  int n_items = 0;
  long long nnz = 0;
  std::vector<std::vector<int>> by_user;
  std::vector<std::vector<int>> by_item;
};

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  double foldin_frac = 0.8;
  std::uint64_t seed = 0;
};

// A validation/test user: fold-in items rebuild the embedding, target items
// are what the ranking is scored against. The two sets are disjoint.
struct HoldoutUser {
  std::string id;
  std::vector<int> foldin;
  std::vector<int> target;
};

struct BuiltMatrix {
  FeedbackMatrix matrix;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
};

// Everything downstream trains and evaluates on. The item index spans all
// items that survive filtering, including items whose every interactor is a
// holdout user, so the split never discards an interaction.
struct DatasetBundle {
  FeedbackMatrix train;
  std::vector<std::string> train_user_ids;
  std::vector<std::string> item_ids;
  std::vector<HoldoutUser> val_users;
  std::vector<HoldoutUser> test_users;
  SplitSpec spec;
};

inline void validate_split_spec(const SplitSpec& spec) {
  std::vector<std::string> bad;
  if (!(spec.train_frac > 0) || !(spec.val_frac > 0) || !(spec.test_frac > 0)) {
    bad.push_back("split fractions must be positive");
  }
  double sum = spec.train_frac + spec.val_frac + spec.test_frac;
  if (std::abs(sum - 1.0) > 1e-9) {
    bad.push_back(fmt::format("split fractions sum to {} (want 1)", sum));
  }
  if (!(spec.foldin_frac > 0.0 && spec.foldin_frac < 1.0)) {
    bad.push_back("foldin_frac must lie in (0, 1)");
  }
  if (!bad.empty()) {
    std::string msg = "invalid split spec:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw ConfigError(msg);
  }
}

// Reads delimited text with columns user,item,rating[,timestamp]. The
// delimiter (comma or tab) and an optional header row are detected from the
// first line. With a threshold, rows whose rating clears it are kept; without
// one, every row is kept. Either way the output is binarized to rating 1.0.
inline std::vector<InteractionTriple> load_interactions(
    const std::string& path, std::optional<double> rating_threshold) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path));
  std::vector<InteractionTriple> out;
  std::string line;
  int lineno = 0;
  char delim = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (delim == 0) delim = line.find('\t') != std::string::npos ? '\t' : ',';
    auto fields = split(line, delim);
    if (fields.size() < 3 || fields.size() > 4) {
      throw ConfigError(fmt::format(
          "{}:{}: expected 3 or 4 columns, got {}", path, lineno, fields.size()));
    }
    double rating = 0;
    if (!parse_double(fields[2], &rating)) {
      // A non-numeric rating on the first content line is a header.
      if (first_content_line) {
        first_content_line = false;
        continue;
      }
      throw ConfigError(
          fmt::format("{}:{}: rating `{}` is not a number", path, lineno,
                      trim(fields[2])));
    }
    first_content_line = false;
    std::string user = trim(fields[0]);
    std::string item = trim(fields[1]);
    if (user.empty() || item.empty()) {
      throw ConfigError(fmt::format("{}:{}: empty user or item id", path, lineno));
    }
    if (!std::isfinite(rating)) {
      throw ConfigError(fmt::format("{}:{}: rating is not finite", path, lineno));
    }
    if (rating_threshold && rating < *rating_threshold) continue;
    out.push_back({std::move(user), std::move(item), 1.0});
  }
  return out;
}

// Drops users and items with fewer than min_count distinct interactions,
// repeating until nothing changes. Duplicate pairs are collapsed first so
// counts reflect distinct interactions.
inline std::vector<InteractionTriple> filter_min_interactions(
    const std::vector<InteractionTriple>& triples, int min_count) {
  if (min_count < 0) throw ConfigError("min_count must be >= 0");
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& t : triples) pairs.insert({t.user, t.item});

  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::string, int> user_count, item_count;
    for (const auto& [u, i] : pairs) {
      user_count[u]++;
      item_count[i]++;
    }
    for (auto it = pairs.begin(); it != pairs.end();) {
      if (user_count[it->first] < min_count ||
          item_count[it->second] < min_count) {
        it = pairs.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  std::vector<InteractionTriple> out;
  out.reserve(pairs.size());
  for (const auto& [u, i] : pairs) out.push_back({u, i, 1.0});
  return out;
}

// Compact 0-based reindexing in lexicographic id order (deterministic and
// independent of input order). Duplicate pairs collapse to one entry.
inline BuiltMatrix build_matrix(const std::vector<InteractionTriple>& triples) {
  if (triples.empty()) throw ConfigError("no interactions to build a matrix from");
  std::set<std::string> users, items;
  for (const auto& t : triples) {
    users.insert(t.user);
    items.insert(t.item);
  }
  BuiltMatrix built;
  built.user_ids.assign(users.begin(), users.end());
  built.item_ids.assign(items.begin(), items.end());
  std::map<std::string, int> uidx, iidx;
  for (size_t i = 0; i < built.user_ids.size(); ++i) uidx[built.user_ids[i]] = i;
  for (size_t i = 0; i < built.item_ids.size(); ++i) iidx[built.item_ids[i]] = i;

  std::set<std::pair<int, int>> pairs;
  for (const auto& t : triples) pairs.insert({uidx[t.user], iidx[t.item]});

  FeedbackMatrix& m = built.matrix;
  m.n_users = static_cast<int>(built.user_ids.size());
  m.n_items = static_cast<int>(built.item_ids.size());
  m.by_user.assign(m.n_users, {});
  m.by_item.assign(m.n_items, {});
  for (const auto& [u, j] : pairs) {
    m.by_user[u].push_back(j);
    m.by_item[j].push_back(u);
  }
  m.nnz = static_cast<long long>(pairs.size());
  return built;
}

// Cross-checks the two orientations encode the same pair set.
inline void validate_matrix(const FeedbackMatrix& m) {
  long long n = 0;
  std::set<std::pair<int, int>> from_user;
  for (int u = 0; u < m.n_users; ++u) {
    int prev = -1;
    for (int j : m.by_user[u]) {
      if (j < 0 || j >= m.n_items) throw Error("item index out of range");
      if (j <= prev) throw Error("by_user rows must be sorted and unique");
      prev = j;
      from_user.insert({u, j});
      ++n;
    }
  }
  if (n != m.nnz) throw Error("nnz does not match by_user");
  long long n2 = 0;
  for (int j = 0; j < m.n_items; ++j) {
    int prev = -1;
    for (int u : m.by_item[j]) {
      if (u < 0 || u >= m.n_users) throw Error("user index out of range");
      if (u <= prev) throw Error("by_item rows must be sorted and unique");
      prev = u;
      if (!from_user.count({u, j})) throw Error("orientation mismatch");
      ++n2;
    }
  }
  if (n2 != m.nnz) throw Error("nnz does not match by_item");
}

// Partitions users into train/val/test by seeded hash: users are ordered by
// hash value and the ordering is cut at the fraction boundaries, which hits
// the requested counts exactly and ignores input order. Holdout users then
// split their items into fold-in and target uniformly under a per-user RNG.
inline DatasetBundle strong_generalization_split(
    const std::vector<InteractionTriple>& triples, const SplitSpec& spec) {
  validate_split_spec(spec);

  std::map<std::string, std::set<std::string>> by_user;
  std::set<std::string> item_set;
  for (const auto& t : triples) {
    by_user[t.user].insert(t.item);
    item_set.insert(t.item);
  }
  int n_users = static_cast<int>(by_user.size());
  if (n_users < 3) throw ConfigError("need at least 3 users to split");

  std::vector<std::pair<std::uint64_t, std::string>> order;
  order.reserve(n_users);
  for (const auto& [u, _] : by_user) {
    order.emplace_back(seeded_id_hash(spec.seed, u), u);
  }
  std::sort(order.begin(), order.end());

  int n_train = static_cast<int>(std::floor(spec.train_frac * n_users));
  int n_val = static_cast<int>(
                  std::floor((spec.train_frac + spec.val_frac) * n_users)) -
              n_train;
  int n_test = n_users - n_train - n_val;
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    throw ConfigError(
        fmt::format("too few users ({}) to populate all splits at "
                    "{}/{}/{}",
                    n_users, spec.train_frac, spec.val_frac, spec.test_frac));
  }

  std::vector<std::string> train_users, val_users, test_users;
  for (int i = 0; i < n_users; ++i) {
    const std::string& u = order[i].second;
    if (i < n_train) {
      train_users.push_back(u);
    } else if (i < n_train + n_val) {
      val_users.push_back(u);
    } else {
      test_users.push_back(u);
    }
  }
  std::sort(train_users.begin(), train_users.end());
  std::sort(val_users.begin(), val_users.end());
  std::sort(test_users.begin(), test_users.end());

  DatasetBundle bundle;
  bundle.spec = spec;
  bundle.item_ids.assign(item_set.begin(), item_set.end());
  std::map<std::string, int> iidx;
  for (size_t i = 0; i < bundle.item_ids.size(); ++i) iidx[bundle.item_ids[i]] = i;

  bundle.train_user_ids = train_users;
  FeedbackMatrix& m = bundle.train;
  m.n_users = static_cast<int>(train_users.size());
  m.n_items = static_cast<int>(bundle.item_ids.size());
  m.by_user.assign(m.n_users, {});
  m.by_item.assign(m.n_items, {});
  for (int u = 0; u < m.n_users; ++u) {
    for (const auto& item : by_user[train_users[u]]) {
      int j = iidx[item];
      m.by_user[u].push_back(j);
      m.by_item[j].push_back(u);
      ++m.nnz;
    }
  }
  for (auto& row : m.by_item) std::sort(row.begin(), row.end());

  auto make_holdout = [&](const std::vector<std::string>& users) {
    std::vector<HoldoutUser> out;
    out.reserve(users.size());
    for (const auto& u : users) {
      std::vector<int> items;
      for (const auto& item : by_user[u]) items.push_back(iidx[item]);
      std::sort(items.begin(), items.end());
      std::mt19937_64 rng(seeded_id_hash(spec.seed ^ 0x9e3779b97f4a7c15ULL, u));
      std::shuffle(items.begin(), items.end(), rng);
      size_t n_foldin = static_cast<size_t>(
          std::floor(spec.foldin_frac * static_cast<double>(items.size())));
      HoldoutUser hu;
      hu.id = u;
      hu.foldin.assign(items.begin(), items.begin() + n_foldin);
      hu.target.assign(items.begin() + n_foldin, items.end());
      std::sort(hu.foldin.begin(), hu.foldin.end());
      std::sort(hu.target.begin(), hu.target.end());
      out.push_back(std::move(hu));
    }
    return out;
  };
  bundle.val_users = make_holdout(val_users);
  bundle.test_users = make_holdout(test_users);
  return bundle;
}

// Deterministic manifest rows for a bundle: counts, seed, fractions. This is
// the file whose fingerprint identifies the dataset in run manifests.
inline KvList bundle_manifest(const DatasetBundle& b) {
  auto holdout_nnz = [](const std::vector<HoldoutUser>& users) {
    long long foldin = 0, target = 0;
    for (const auto& hu : users) {
      foldin += static_cast<long long>(hu.foldin.size());
      target += static_cast<long long>(hu.target.size());
    }
    return std::pair<long long, long long>(foldin, target);
  };
  auto [vf, vt] = holdout_nnz(b.val_users);
  auto [tf, tt] = holdout_nnz(b.test_users);
  KvList kv;
  kv.emplace_back("format", "fairals-bundle-1");
  kv.emplace_back("n_users_train", std::to_string(b.train.n_users));
  kv.emplace_back("n_users_val", std::to_string(b.val_users.size()));
  kv.emplace_back("n_users_test", std::to_string(b.test_users.size()));
  kv.emplace_back("n_items", std::to_string(b.train.n_items));
  kv.emplace_back("nnz_train", std::to_string(b.train.nnz));
  kv.emplace_back("nnz_val_foldin", std::to_string(vf));
  kv.emplace_back("nnz_val_target", std::to_string(vt));
  kv.emplace_back("nnz_test_foldin", std::to_string(tf));
  kv.emplace_back("nnz_test_target", std::to_string(tt));
  kv.emplace_back("train_frac", format_double(b.spec.train_frac));
  kv.emplace_back("val_frac", format_double(b.spec.val_frac));
  kv.emplace_back("test_frac", format_double(b.spec.test_frac));
  kv.emplace_back("foldin_frac", format_double(b.spec.foldin_frac));
  kv.emplace_back("seed", std::to_string(b.spec.seed));
  return kv;
}

namespace detail {

inline void write_id_file(const std::string& path,
                          const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  for (const auto& id : ids) out << id << "\n";
}

inline std::vector<std::string> read_id_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open {}", path));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

inline void write_pair_file(const std::string& path,
                            const std::vector<std::pair<int, int>>& pairs) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  for (const auto& [a, b] : pairs) out << a << "\t" << b << "\n";
}

inline std::vector<std::pair<int, int>> read_pair_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open {}", path));
  std::vector<std::pair<int, int>> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    long long a = 0, b = 0;
    if (fields.size() != 2 || !parse_int(fields[0], &a) ||
        !parse_int(fields[1], &b)) {
      throw Error(fmt::format("{}:{}: bad index pair", path, lineno));
    }
    pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
  }
  return pairs;
}

}  // namespace detail

// Bundle directory layout: id files (line number = index), tab-separated
// index-pair files per split, and the manifest.
inline void save_bundle(const DatasetBundle& b, const std::string& dir) {
  ensure_dir(dir);
  auto at = [&](const std::string& name) { return dir + "/" + name; };
  detail::write_id_file(at("items.txt"), b.item_ids);
  detail::write_id_file(at("users_train.txt"), b.train_user_ids);
  std::vector<std::string> val_ids, test_ids;
  for (const auto& hu : b.val_users) val_ids.push_back(hu.id);
  for (const auto& hu : b.test_users) test_ids.push_back(hu.id);
  detail::write_id_file(at("users_val.txt"), val_ids);
  detail::write_id_file(at("users_test.txt"), test_ids);

  std::vector<std::pair<int, int>> train_pairs;
  for (int u = 0; u < b.train.n_users; ++u) {
    for (int j : b.train.by_user[u]) train_pairs.emplace_back(u, j);
  }
  detail::write_pair_file(at("train.txt"), train_pairs);

  auto dump_holdout = [&](const std::vector<HoldoutUser>& users,
                          const std::string& foldin_name,
                          const std::string& target_name) {
    std::vector<std::pair<int, int>> foldin, target;
    for (size_t u = 0; u < users.size(); ++u) {
      for (int j : users[u].foldin) foldin.emplace_back(static_cast<int>(u), j);
      for (int j : users[u].target) target.emplace_back(static_cast<int>(u), j);
    }
    detail::write_pair_file(at(foldin_name), foldin);
    detail::write_pair_file(at(target_name), target);
  };
  dump_holdout(b.val_users, "val_foldin.txt", "val_target.txt");
  dump_holdout(b.test_users, "test_foldin.txt", "test_target.txt");

  write_kv_file(at("manifest.txt"), bundle_manifest(b));
}

inline DatasetBundle load_bundle(const std::string& dir) {
  auto at = [&](const std::string& name) { return dir + "/" + name; };
  if (!std::filesystem::exists(at("manifest.txt"))) {
    throw ConfigError(fmt::format("{} is not a dataset bundle (no manifest.txt)", dir));
  }
  DatasetBundle b;
  b.item_ids = detail::read_id_file(at("items.txt"));
  b.train_user_ids = detail::read_id_file(at("users_train.txt"));
  auto val_ids = detail::read_id_file(at("users_val.txt"));
  auto test_ids = detail::read_id_file(at("users_test.txt"));

  FeedbackMatrix& m = b.train;
  m.n_users = static_cast<int>(b.train_user_ids.size());
  m.n_items = static_cast<int>(b.item_ids.size());
  m.by_user.assign(m.n_users, {});
  m.by_item.assign(m.n_items, {});
  for (const auto& [u, j] : detail::read_pair_file(at("train.txt"))) {
    if (u < 0 || u >= m.n_users || j < 0 || j >= m.n_items) {
      throw Error("train.txt index out of range");
    }
    m.by_user[u].push_back(j);
    m.by_item[j].push_back(u);
    ++m.nnz;
  }
  for (auto& row : m.by_user) std::sort(row.begin(), row.end());
  for (auto& row : m.by_item) std::sort(row.begin(), row.end());

  auto load_holdout = [&](const std::vector<std::string>& ids,
                          const std::string& foldin_name,
                          const std::string& target_name) {
    std::vector<HoldoutUser> users(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) users[i].id = ids[i];
    for (const auto& [u, j] : detail::read_pair_file(at(foldin_name))) {
      if (u < 0 || u >= static_cast<int>(users.size()) || j < 0 ||
          j >= m.n_items) {
        throw Error(foldin_name + " index out of range");
      }
      users[u].foldin.push_back(j);
    }
    for (const auto& [u, j] : detail::read_pair_file(at(target_name))) {
      if (u < 0 || u >= static_cast<int>(users.size()) || j < 0 ||
          j >= m.n_items) {
        throw Error(target_name + " index out of range");
      }
      users[u].target.push_back(j);
    }
    return users;
  };
  b.val_users = load_holdout(val_ids, "val_foldin.txt", "val_target.txt");
  b.test_users = load_holdout(test_ids, "test_foldin.txt", "test_target.txt");

  auto manifest = kv_map(read_kv_file(at("manifest.txt")));
  auto get_d = [&](const char* key, double fallback) {
    auto it = manifest.find(key);
    double v = fallback;
    if (it != manifest.end()) parse_double(it->second, &v);
    return v;
  };
  b.spec.train_frac = get_d("train_frac", 0.8);
  b.spec.val_frac = get_d("val_frac", 0.1);
  b.spec.test_frac = get_d("test_frac", 0.1);
  b.spec.foldin_frac = get_d("foldin_frac", 0.8);
  b.spec.seed = static_cast<std::uint64_t>(get_d("seed", 0));
  validate_matrix(b.train);
  return b;
}

}  // namespace fairals
