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

// The accuracy-fairness sweep: a Cartesian grid over hyperparameters, one
// train-and-evaluate run per grid point, and a frontier table with Pareto
// flags. Runs are content-addressed by a hash of the full configuration, so
// an interrupted sweep resumes where it stopped and never retrains a
// finished point. A failed point is recorded in the table and skipped by the
// Pareto marking; it does not abort the sweep.

#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairals/checkpoint.hpp"
#include "fairals/config.hpp"
#include "fairals/evaluation.hpp"
#include "fairals/feedback.hpp"
#include "fairals/train.hpp"

namespace fairals {

struct SweepConfig {
  std::string algo = "exadmm";  // "ials" or "exadmm"
  ExAdmmHyperParams fixed;      // shared by every grid point
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  std::vector<int> k_values = {10};
};

inline void apply_axis(ExAdmmHyperParams& hp, const std::string& name,
                       double value) {
  auto as_int = [&](const char* what) {
    if (!(value == std::floor(value)) || std::abs(value) > 1e17) {
      throw ConfigError(
          fmt::format("grid.{}: {} is not an integer", name, value));
    }
    (void)what;
    return static_cast<long long>(value);
  };
  if (name == "alpha0") {
    hp.base.alpha0 = value;
  } else if (name == "lambda_l2") {
    hp.base.lambda_l2 = value;
  } else if (name == "eta") {
    hp.base.eta = value;
  } else if (name == "sigma") {
    hp.base.sigma = value;
  } else if (name == "d") {
    hp.base.d = static_cast<int>(as_int("d"));
  } else if (name == "epochs") {
    hp.base.epochs = static_cast<int>(as_int("epochs"));
  } else if (name == "seed") {
    hp.base.seed = static_cast<std::uint64_t>(as_int("seed"));
  } else if (name == "lambda_ex_star") {
    hp.lambda_ex_star = value;
  } else if (name == "rho_star") {
    hp.rho_star = value;
  } else if (name == "gamma") {
    hp.gamma = value;
  } else {
    throw ConfigError(fmt::format("unknown grid axis `{}`", name));
  }
}

struct GridPoint {
  ExAdmmHyperParams hp;
  std::vector<double> axis_values;  // parallel to the sorted axis list
};

// Axes are sorted by name; points come out in lexicographic order of their
// per-axis value indices, so the expansion is deterministic no matter how
// the configuration listed the axes.
inline std::vector<GridPoint> expand_grid(const SweepConfig& cfg) {
  auto axes = cfg.axes;
  std::sort(axes.begin(), axes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].second.empty()) {
      throw ConfigError(
          fmt::format("grid axis `{}` has no values", axes[i].first));
    }
    if (i > 0 && axes[i].first == axes[i - 1].first) {
      throw ConfigError(
          fmt::format("grid axis `{}` appears twice", axes[i].first));
    }
  }
  long long total = 1;
  for (const auto& [name, values] : axes) {
    total *= static_cast<long long>(values.size());
    if (total > 100000) {
      throw ConfigError("grid expands to more than 100000 configurations");
    }
  }
  std::vector<GridPoint> points;
  points.reserve(static_cast<size_t>(total));
  for (long long idx = 0; idx < total; ++idx) {
    GridPoint pt;
    pt.hp = cfg.fixed;
    pt.axis_values.resize(axes.size());
    long long rem = idx;
    for (size_t a = axes.size(); a-- > 0;) {
      const auto& values = axes[a].second;
      size_t vi = static_cast<size_t>(rem % static_cast<long long>(values.size()));
      rem /= static_cast<long long>(values.size());
      pt.axis_values[a] = values[vi];
      apply_axis(pt.hp, axes[a].first, values[vi]);
    }
    points.push_back(std::move(pt));
  }
  return points;
}

// A grid point's identity is its algorithm plus the complete hyperparameter
// set, serialized canonically and hashed. Checkpoints are stored under this
// id, which is what makes resumption safe: equal id, equal model.
inline std::string config_id(const std::string& algo,
                             const ExAdmmHyperParams& hp) {
  std::string canon = "algo=" + algo;
  for (const auto& [k, v] : exadmm_params_kv(hp)) canon += ";" + k + "=" + v;
  return fmt::format("{:016x}", fnv1a64(canon));
}

struct FrontierRow {
  std::string id;
  std::vector<double> axis_values;
  std::vector<double> ndcg;  // parallel to k_values
  std::vector<double> gini;  // parallel to k_values
  double seconds = 0;
  bool pareto = false;
  std::string status = "ok";  // "ok" or "error"
  std::string message;        // failure detail, empty when ok
};

// A point is on the frontier when no other point is at least as accurate and
// at least as fair with one of the two strict. Equal points dominate in
// neither direction, so ties are all kept.
inline std::vector<bool> pareto_flags(
    const std::vector<std::pair<double, double>>& acc_fair) {
  const size_t n = acc_fair.size();
  std::vector<bool> flags(n, true);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n && flags[i]; ++j) {
      if (j == i) continue;
      bool weakly = acc_fair[j].first >= acc_fair[i].first &&
                    acc_fair[j].second <= acc_fair[i].second;
      bool strictly = acc_fair[j].first > acc_fair[i].first ||
                      acc_fair[j].second < acc_fair[i].second;
      if (weakly && strictly) flags[i] = false;
    }
  }
  return flags;
}

// Marks rows using accuracy and fairness at the largest cutoff, the same
// cutoff model selection reads. Failed rows never carry the flag.
inline void pareto_filter(std::vector<FrontierRow>& rows) {
  std::vector<size_t> ok;
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < rows.size(); ++i) {
    rows[i].pareto = false;
    if (rows[i].status == "ok" && !rows[i].ndcg.empty()) {
      ok.push_back(i);
      pts.emplace_back(rows[i].ndcg.back(), rows[i].gini.back());
    }
  }
  std::vector<bool> flags = pareto_flags(pts);
  for (size_t p = 0; p < ok.size(); ++p) rows[ok[p]].pareto = flags[p];
}

namespace detail {

inline std::string frontier_header(
    const std::vector<std::pair<std::string, std::vector<double>>>& axes,
    const std::vector<int>& ks) {
  auto sorted_axes = axes;
  std::sort(sorted_axes.begin(), sorted_axes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string h = "id";
  for (const auto& [name, values] : sorted_axes) h += "\t" + name;
  for (int k : ks) h += fmt::format("\tndcg@{}", k);
  for (int k : ks) h += fmt::format("\tgini@{}", k);
  h += "\tseconds\tpareto\tstatus\tmessage";
  return h;
}

inline std::string sanitize_cell(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace detail

inline void write_frontier(const std::string& path,
                           const std::vector<FrontierRow>& rows,
                           const SweepConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write frontier file: " + path);
  out << detail::frontier_header(cfg.axes, cfg.k_values) << "\n";
  for (const FrontierRow& r : rows) {
    out << r.id;
    for (double v : r.axis_values) out << "\t" << format_double(v);
    for (double v : r.ndcg) out << "\t" << format_double(v);
    for (double v : r.gini) out << "\t" << format_double(v);
    out << "\t" << format_double(r.seconds) << "\t" << (r.pareto ? 1 : 0)
        << "\t" << r.status << "\t" << detail::sanitize_cell(r.message) << "\n";
  }
  if (!out) throw Error("write failed for frontier file: " + path);
}

inline std::vector<FrontierRow> read_frontier(const std::string& path,
                                              const SweepConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open frontier file: " + path);
  const std::string want_header = detail::frontier_header(cfg.axes, cfg.k_values);
  const size_t n_axes = cfg.axes.size();
  const size_t n_ks = cfg.k_values.size();
  const size_t n_cols = 1 + n_axes + 2 * n_ks + 4;
  std::vector<FrontierRow> rows;
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      first = false;
      if (line != want_header) {
        throw ConfigError(fmt::format(
            "{} was written by a different sweep configuration", path));
      }
      continue;
    }
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != n_cols) {
      throw Error(fmt::format("{}:{}: expected {} columns, got {}", path,
                              lineno, n_cols, cols.size()));
    }
    FrontierRow r;
    size_t c = 0;
    r.id = cols[c++];
    auto num = [&](const std::string& s) {
      double v = 0;
      if (!parse_double(s, &v)) {
        throw Error(fmt::format("{}:{}: bad number `{}`", path, lineno, s));
      }
      return v;
    };
    for (size_t a = 0; a < n_axes; ++a) r.axis_values.push_back(num(cols[c++]));
    for (size_t k = 0; k < n_ks; ++k) r.ndcg.push_back(num(cols[c++]));
    for (size_t k = 0; k < n_ks; ++k) r.gini.push_back(num(cols[c++]));
    r.seconds = num(cols[c++]);
    r.pareto = cols[c++] == "1";
    r.status = cols[c++];
    r.message = cols[c++];
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string checkpoint_path(const std::string& out_dir,
                                   const std::string& id) {
  return out_dir + "/ckpt_" + id + ".bin";
}

// Trains and evaluates every grid point, reusing rows (and checkpoints) from
// a previous partial run of the same sweep in the same directory. The
// frontier file is rewritten after each point so an interruption loses at
// most the point in flight.
inline std::vector<FrontierRow> run_sweep(const SweepConfig& raw_cfg,
                                          const DatasetBundle& data,
                                          const std::string& out_dir,
                                          const TrainOptions& topts = {}) {
  if (raw_cfg.algo != "ials" && raw_cfg.algo != "exadmm") {
    throw ConfigError("sweep algo must be `ials` or `exadmm`, got `" +
                      raw_cfg.algo + "`");
  }
  // Cutoffs are sorted and deduplicated up front so the frontier columns
  // line up with the evaluation output, which reports cutoffs in ascending
  // order.
  SweepConfig cfg = raw_cfg;
  std::sort(cfg.k_values.begin(), cfg.k_values.end());
  cfg.k_values.erase(std::unique(cfg.k_values.begin(), cfg.k_values.end()),
                     cfg.k_values.end());
  if (cfg.k_values.empty()) throw ConfigError("sweep needs at least one cutoff k");
  ensure_dir(out_dir);
  std::vector<GridPoint> grid = expand_grid(cfg);

  const std::string frontier_path = out_dir + "/frontier.tsv";
  std::map<std::string, FrontierRow> done;
  if (std::filesystem::exists(frontier_path)) {
    for (FrontierRow& r : read_frontier(frontier_path, cfg)) {
      bool usable = r.status != "ok" ||
                    std::filesystem::exists(checkpoint_path(out_dir, r.id));
      if (usable) done.emplace(r.id, std::move(r));
    }
  }

  EvalOptions eopts;
  eopts.k_values = cfg.k_values;
  eopts.threads = topts.threads;

  std::vector<FrontierRow> rows;
  rows.reserve(grid.size());
  for (const GridPoint& pt : grid) {
    const std::string id = config_id(cfg.algo, pt.hp);
    auto it = done.find(id);
    if (it != done.end()) {
      rows.push_back(it->second);
      rows.back().axis_values = pt.axis_values;
      write_frontier(frontier_path, rows, cfg);
      continue;
    }
    FrontierRow r;
    r.id = id;
    r.axis_values = pt.axis_values;
    try {
      TrainResult tr = cfg.algo == "ials"
                           ? train_ials(data.train, pt.hp.base, topts)
                           : train_exadmm(data.train, pt.hp, topts);
      HoldoutEvaluation ev =
          evaluate_holdout(data.val_users, tr.checkpoint.V, pt.hp.base, eopts);
      for (const KMetrics& km : ev.per_k) {
        r.ndcg.push_back(km.ndcg);
        r.gini.push_back(km.gini);
      }
      r.seconds = tr.train_seconds;
      save_checkpoint(checkpoint_path(out_dir, id), tr.checkpoint);
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.ndcg.assign(cfg.k_values.size(), nan);
      r.gini.assign(cfg.k_values.size(), nan);
      r.status = "error";
      r.message = e.what();
    }
    rows.push_back(std::move(r));
    write_frontier(frontier_path, rows, cfg);
  }
  pareto_filter(rows);
  write_frontier(frontier_path, rows, cfg);
  return rows;
}

}  // namespace fairals
