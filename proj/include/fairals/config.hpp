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

// Run configuration: a flat key = value file merged with command-line
// overrides (the override wins), typed accessors that collect every problem
// before reporting, and the run manifest each command writes next to its
// outputs.

#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairals/exadmm.hpp"
#include "fairals/ials.hpp"
#include "fairals/util.hpp"
#include "fairals/version.hpp"

namespace fairals {

// File entries first, overrides after: a later entry for the same key
// replaces the earlier value in place, so the merged list keeps the file's
// order and appends only genuinely new keys.
inline KvList merge_config(const KvList& file_kv, const KvList& overrides) {
  KvList merged = file_kv;
  for (const auto& [k, v] : overrides) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const auto& p) { return p.first == k; });
    if (it != merged.end()) {
      it->second = v;
    } else {
      merged.emplace_back(k, v);
    }
  }
  return merged;
}

// `0.1,0.2,0.3` or `logspace(1e-6,1e-2,5)` (geometric, endpoints included).
inline std::vector<double> parse_double_list(const std::string& value,
                                             const std::string& key) {
  std::string t = trim(value);
  if (t.rfind("logspace(", 0) == 0 && !t.empty() && t.back() == ')') {
    auto parts = split(t.substr(9, t.size() - 10), ',');
    double lo = 0, hi = 0;
    long long n = 0;
    if (parts.size() != 3 || !parse_double(parts[0], &lo) ||
        !parse_double(parts[1], &hi) || !parse_int(parts[2], &n)) {
      throw ConfigError(fmt::format(
          "{}: expected logspace(lo,hi,n), got `{}`", key, t));
    }
    if (!(lo > 0) || !(hi > 0) || n < 1) {
      throw ConfigError(fmt::format(
          "{}: logspace needs lo > 0, hi > 0, n >= 1 (got `{}`)", key, t));
    }
    std::vector<double> out;
    if (n == 1) {
      out.push_back(lo);
      return out;
    }
    double log_lo = std::log(lo);
    double step = (std::log(hi) - log_lo) / static_cast<double>(n - 1);
    for (long long i = 0; i < n; ++i) {
      out.push_back(std::exp(log_lo + step * static_cast<double>(i)));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
  }
  std::vector<double> out;
  for (const std::string& part : split(t, ',')) {
    double v = 0;
    if (!parse_double(part, &v)) {
      throw ConfigError(
          fmt::format("{}: `{}` is not a number", key, trim(part)));
    }
    out.push_back(v);
  }
  return out;
}

// Typed view over merged key = value pairs. Reads mark keys as consumed and
// record parse problems instead of throwing one at a time; finish() then
// reports every problem and every unconsumed key in a single error.
class ConfigView {
 public:
  explicit ConfigView(const KvList& kv) : kv_(kv) {
    for (const auto& [k, v] : kv) values_[k] = v;
    if (values_.size() != kv.size()) {
      // Duplicates are legal in the merged list (override semantics); the
      // map already holds the last value for each key.
      std::map<std::string, std::string> last;
      for (const auto& [k, v] : kv) last[k] = v;
      values_ = std::move(last);
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    touched_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0;
    if (!parse_double(it->second, &v)) {
      errors_.push_back(
          fmt::format("{}: `{}` is not a number", key, it->second));
      return fallback;
    }
    return v;
  }

  long long get_int(const std::string& key, long long fallback) {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v = 0;
    if (!parse_int(it->second, &v)) {
      errors_.push_back(
          fmt::format("{}: `{}` is not an integer", key, it->second));
      return fallback;
    }
    return v;
  }

  std::vector<int> get_int_list(const std::string& key,
                                std::vector<int> fallback) {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    for (const std::string& part : split(it->second, ',')) {
      long long v = 0;
      if (!parse_int(part, &v)) {
        errors_.push_back(
            fmt::format("{}: `{}` is not an integer", key, trim(part)));
        return fallback;
      }
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  // Grid axes: every key of the form `prefix<name>`, in key order.
  std::vector<std::pair<std::string, std::string>> with_prefix(
      const std::string& prefix) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : values_) {
      if (k.rfind(prefix, 0) == 0 && k.size() > prefix.size()) {
        touched_.insert(k);
        out.emplace_back(k.substr(prefix.size()), v);
      }
    }
    return out;
  }

  void record_error(const std::string& message) { errors_.push_back(message); }

  // One error listing everything wrong: bad values first, then keys nothing
  // consumed (usually typos for a known key).
  void finish(const std::string& context) const {
    std::vector<std::string> problems = errors_;
    for (const auto& [k, v] : values_) {
      if (!touched_.count(k)) {
        problems.push_back(fmt::format("unknown key `{}`", k));
      }
    }
    if (problems.empty()) return;
    std::string msg = context + ":";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }

  const KvList& raw() const { return kv_; }

 private:
  KvList kv_;
  std::map<std::string, std::string> values_;
  std::set<std::string> touched_;
  std::vector<std::string> errors_;
};

inline IalsHyperParams ials_params_from(ConfigView& cfg) {
  IalsHyperParams hp;
  hp.d = static_cast<int>(cfg.get_int("d", hp.d));
  hp.alpha0 = cfg.get_double("alpha0", hp.alpha0);
  hp.lambda_l2 = cfg.get_double("lambda_l2", hp.lambda_l2);
  hp.eta = cfg.get_double("eta", hp.eta);
  hp.sigma = cfg.get_double("sigma", hp.sigma);
  hp.epochs = static_cast<int>(cfg.get_int("epochs", hp.epochs));
  hp.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  return hp;
}

inline ExAdmmHyperParams exadmm_params_from(ConfigView& cfg) {
  ExAdmmHyperParams hp;
  hp.base = ials_params_from(cfg);
  hp.lambda_ex_star = cfg.get_double("lambda_ex_star", hp.lambda_ex_star);
  hp.rho_star = cfg.get_double("rho_star", hp.rho_star);
  hp.gamma = cfg.get_double("gamma", hp.gamma);
  return hp;
}

// Hyperparameters echoed back as config entries, in a fixed order so two
// runs with equal settings produce byte-identical manifests.
inline KvList ials_params_kv(const IalsHyperParams& hp) {
  return {
      {"d", fmt::format("{}", hp.d)},
      {"alpha0", format_double(hp.alpha0)},
      {"lambda_l2", format_double(hp.lambda_l2)},
      {"eta", format_double(hp.eta)},
      {"sigma", format_double(hp.sigma)},
      {"epochs", fmt::format("{}", hp.epochs)},
      {"seed", fmt::format("{}", hp.seed)},
  };
}

inline KvList exadmm_params_kv(const ExAdmmHyperParams& hp) {
  KvList kv = ials_params_kv(hp.base);
  kv.emplace_back("lambda_ex_star", format_double(hp.lambda_ex_star));
  kv.emplace_back("rho_star", format_double(hp.rho_star));
  kv.emplace_back("gamma", format_double(hp.gamma));
  return kv;
}

// What a command writes next to its outputs: the command line, the effective
// configuration, the fingerprint of the dataset it consumed, versions,
// timing, and where the outputs went. Everything except wall_seconds is
// deterministic for a fixed command, config, and dataset.
inline KvList run_manifest(const std::string& command,
                           const std::vector<std::string>& argv,
                           const KvList& effective_config,
                           const std::string& data_fingerprint,
                           double wall_seconds,
                           const std::vector<std::string>& outputs) {
  KvList kv;
  kv.emplace_back("command", command);
  std::string joined;
  for (const auto& a : argv) {
    if (!joined.empty()) joined += " ";
    joined += a;
  }
  kv.emplace_back("argv", joined);
  kv.emplace_back("version", kVersion);
  kv.emplace_back("data_fingerprint", data_fingerprint);
  for (const auto& [k, v] : effective_config) {
    kv.emplace_back("config." + k, v);
  }
  for (size_t i = 0; i < outputs.size(); ++i) {
    kv.emplace_back(fmt::format("output.{}", i), outputs[i]);
  }
  kv.emplace_back("wall_seconds", format_double(wall_seconds));
  return kv;
}

inline std::string bundle_fingerprint(const std::string& bundle_dir) {
  return fmt::format("{:016x}", file_fingerprint(bundle_dir + "/manifest.txt"));
}

}  // namespace fairals
