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

// Convergence instrumentation for exposure-controlled training: the exposure
// regularizer, the augmented Lagrangian, analytic gradient norms, a per-epoch
// log file, and an end-of-run summary. Everything here is a pure function of
// a state snapshot; the trainer calls in at epoch boundaries.

#pragma once

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "fairals/exadmm.hpp"
#include "fairals/feedback.hpp"
#include "fairals/ials.hpp"
#include "fairals/parallel.hpp"
#include "fairals/types.hpp"
#include "fairals/util.hpp"

namespace fairals {

// Second moment of the predicted scores, (1/|V|) |V m|^2 with m the mean
// user embedding. Large values mean a few items get high scores from the
// average user; driving this down spreads exposure.
inline double fairness_regularizer(const EmbeddingMatrix& u,
                                   const EmbeddingMatrix& v, int threads = 1) {
  Vector mean = column_sum(u, threads) / static_cast<double>(u.rows());
  return (v * mean).squaredNorm() / static_cast<double>(v.rows());
}

// L_rho(V, U, s, w): the training loss plus the exposure penalty on s, the
// quadratic coupling penalty, and the dual offset.
inline double augmented_lagrangian(const ExAdmmState& st,
                                   const FeedbackMatrix& m,
                                   const TikhonovWeights& wts,
                                   const ExAdmmDerived& dp, int threads = 1) {
  double loss = ials_objective(m, st.U, st.V, wts, dp.alpha0, threads);
  Vector mean = column_sum(st.U, threads) / static_cast<double>(m.n_users);
  double exposure = (st.V * st.s).squaredNorm();
  double coupling = (mean - st.s + st.w).squaredNorm();
  return loss + 0.5 * dp.lambda_ex * exposure + 0.5 * dp.rho * coupling -
         0.5 * dp.rho * st.w.squaredNorm();
}

struct GradientNorms {
  double v = 0;
  double u = 0;
  double s = 0;
  double w = 0;
};

// Norms of the four block gradients of L_rho at the current iterate,
// assembled from the same closed forms the solver steps on.
inline GradientNorms gradient_norms(const ExAdmmState& st,
                                    const FeedbackMatrix& m,
                                    const TikhonovWeights& wts,
                                    const ExAdmmDerived& dp, int threads = 1) {
  const double n_users = static_cast<double>(m.n_users);
  Matrix g_u = gramian(st.U, threads);
  Matrix g_v = gramian(st.V, threads);
  Vector mean = column_sum(st.U, threads) / n_users;
  Vector coupling = mean - st.s + st.w;
  Vector row_shift = (dp.rho / n_users) * coupling;

  Vector v_sq(m.n_items);
  parallel_rows(m.n_items, threads, [&](int j) {
    Vector v_j = st.V.row(j).transpose();
    Vector grad = dp.alpha0 * (g_u * v_j) + wts.item(j) * v_j +
                  (dp.lambda_ex * st.s.dot(v_j)) * st.s;
    for (int i : m.by_item[j]) {
      grad += (st.U.row(i).dot(v_j) - 1.0) * st.U.row(i).transpose();
    }
    v_sq(j) = grad.squaredNorm();
  });

  Vector u_sq(m.n_users);
  parallel_rows(m.n_users, threads, [&](int i) {
    Vector grad = gradient_u_row(m.by_user[i], st.V, g_v,
                                 st.U.row(i).transpose(), dp.alpha0,
                                 wts.user(i)) +
                  row_shift;
    u_sq(i) = grad.squaredNorm();
  });

  GradientNorms out;
  out.v = std::sqrt(v_sq.sum());
  out.u = std::sqrt(u_sq.sum());
  out.s = (dp.lambda_ex * (g_v * st.s) - dp.rho * coupling).norm();
  out.w = (dp.rho * (mean - st.s)).norm();
  return out;
}

// One row of the per-epoch log. Gradient norms are nan when their extra
// sweep was not requested.
struct EpochDiagnostics {
  int epoch = 0;
  double lagrangian = 0;
  double ials_loss = 0;
  double r_ex = 0;
  double residual_v = 0;
  double residual_u = 0;
  double residual_s = 0;
  double residual_w = 0;
  double feasibility_gap = 0;
  double grad_norm_v = std::nan("");
  double grad_norm_u = std::nan("");
  double grad_norm_s = std::nan("");
  double grad_norm_w = std::nan("");
  bool rho_ok = true;
  bool gamma_ok = true;
};

inline constexpr const char* kEpochLogHeader =
    "epoch\tlagrangian\tials_loss\tr_ex\tresidual_v\tresidual_u\tresidual_s\t"
    "residual_w\tfeasibility_gap\tgrad_norm_v\tgrad_norm_u\tgrad_norm_s\t"
    "grad_norm_w\trho_ok\tgamma_ok";

// Appends one tab-separated row per epoch, flushed eagerly so an interrupted
// run still leaves a readable log.
class EpochLogWriter {
 public:
  explicit EpochLogWriter(const std::string& path) : out_(path) {
    if (!out_) throw Error("cannot open epoch log for writing: " + path);
    out_ << kEpochLogHeader << "\n";
    out_.flush();
  }

  void append(const EpochDiagnostics& d) {
    out_ << fmt::format(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", d.epoch,
        format_double(d.lagrangian), format_double(d.ials_loss),
        format_double(d.r_ex), format_double(d.residual_v),
        format_double(d.residual_u), format_double(d.residual_s),
        format_double(d.residual_w), format_double(d.feasibility_gap),
        format_double(d.grad_norm_v), format_double(d.grad_norm_u),
        format_double(d.grad_norm_s), format_double(d.grad_norm_w),
        d.rho_ok ? 1 : 0, d.gamma_ok ? 1 : 0);
    out_.flush();
  }

 private:
  std::ofstream out_;
};

inline std::vector<EpochDiagnostics> read_epoch_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open epoch log for reading: " + path);
  std::vector<EpochDiagnostics> rows;
  std::string line;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (first) {
      first = false;
      if (line != kEpochLogHeader) {
        throw Error(fmt::format("unexpected epoch log header in {}", path));
      }
      continue;
    }
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 15) {
      throw Error(fmt::format("{}:{}: expected 15 columns, found {}", path,
                              line_no, cols.size()));
    }
    auto num = [&](int c) {
      double v = 0;
      if (!parse_double(cols[c], &v)) {
        throw Error(fmt::format("{}:{}: bad number '{}'", path, line_no,
                                cols[c]));
      }
      return v;
    };
    long long epoch = 0, rho_ok = 0, gamma_ok = 0;
    if (!parse_int(cols[0], &epoch) || !parse_int(cols[13], &rho_ok) ||
        !parse_int(cols[14], &gamma_ok)) {
      throw Error(fmt::format("{}:{}: bad integer column", path, line_no));
    }
    EpochDiagnostics d;
    d.epoch = static_cast<int>(epoch);
    d.lagrangian = num(1);
    d.ials_loss = num(2);
    d.r_ex = num(3);
    d.residual_v = num(4);
    d.residual_u = num(5);
    d.residual_s = num(6);
    d.residual_w = num(7);
    d.feasibility_gap = num(8);
    d.grad_norm_v = num(9);
    d.grad_norm_u = num(10);
    d.grad_norm_s = num(11);
    d.grad_norm_w = num(12);
    d.rho_ok = rho_ok != 0;
    d.gamma_ok = gamma_ok != 0;
    rows.push_back(d);
  }
  return rows;
}

struct ConvergenceReport {
  int epochs = 0;
  double max_lagrangian_increase = 0;
  double final_residual_v = 0;
  double final_residual_u = 0;
  double final_residual_s = 0;
  double final_residual_w = 0;
  double final_feasibility_gap = 0;
  bool rho_held = true;
  bool gamma_held = true;
};

inline ConvergenceReport convergence_report(
    const std::vector<EpochDiagnostics>& log) {
  if (log.size() < 2) {
    throw Error(fmt::format(
        "convergence report needs at least 2 epochs, got {}", log.size()));
  }
  ConvergenceReport rep;
  rep.epochs = static_cast<int>(log.size());
  rep.max_lagrangian_increase = log[1].lagrangian - log[0].lagrangian;
  for (std::size_t k = 1; k + 1 < log.size(); ++k) {
    rep.max_lagrangian_increase = std::max(
        rep.max_lagrangian_increase, log[k + 1].lagrangian - log[k].lagrangian);
  }
  const EpochDiagnostics& last = log.back();
  rep.final_residual_v = last.residual_v;
  rep.final_residual_u = last.residual_u;
  rep.final_residual_s = last.residual_s;
  rep.final_residual_w = last.residual_w;
  rep.final_feasibility_gap = last.feasibility_gap;
  for (const auto& d : log) {
    rep.rho_held = rep.rho_held && d.rho_ok;
    rep.gamma_held = rep.gamma_held && d.gamma_ok;
  }
  return rep;
}

inline KvList report_kv(const ConvergenceReport& rep) {
  return {
      {"epochs", fmt::format("{}", rep.epochs)},
      {"max_lagrangian_increase", format_double(rep.max_lagrangian_increase)},
      {"final_residual_v", format_double(rep.final_residual_v)},
      {"final_residual_u", format_double(rep.final_residual_u)},
      {"final_residual_s", format_double(rep.final_residual_s)},
      {"final_residual_w", format_double(rep.final_residual_w)},
      {"final_feasibility_gap", format_double(rep.final_feasibility_gap)},
      {"rho_held", rep.rho_held ? "1" : "0"},
      {"gamma_held", rep.gamma_held ? "1" : "0"},
  };
}

}  // namespace fairals
