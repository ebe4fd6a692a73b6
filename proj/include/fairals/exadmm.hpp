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

// Exposure-controlled ADMM training. On top of the alternating least squares
// loss this adds a penalty on the second moment of the predicted scores,
// which concentrates when a few items dominate every user's score vector:
//
//   R_ex(U, V) = (1/|V|) | (1/|U|) V U' 1 |^2 = (1/|V|) |V m|^2,
//
// with m the mean user embedding. Splitting on an auxiliary vector s = m and
// a scaled dual w gives the augmented Lagrangian
//
//   L_rho(V, U, s, w) = L(V, U) + (lambda_ex/2) |V s|^2
//                     + (rho/2) |m - s + w|^2 - (rho/2) |w|^2
//
// (|V| folded into lambda_ex). One epoch updates V row-wise in closed form,
// takes a linearized proximal step on U whose coupling solve collapses to a
// rank-one correction, then solves for s and ascends on w. The U path does
// no d^3 work; its cost per row is one d^2 matrix-vector product plus O(d)
// per interaction.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fairals/feedback.hpp"
#include "fairals/ials.hpp"
#include "fairals/opcounts.hpp"
#include "fairals/parallel.hpp"
#include "fairals/types.hpp"

namespace fairals {

// Exposure penalty and ADMM step sizes. lambda_ex_star and rho_star are the
// user-count-invariant parametrization; the working values scale with the
// squared user count so that one grid transfers across dataset sizes.
struct ExAdmmHyperParams {
  IalsHyperParams base;
  double lambda_ex_star = 1e-8;
  double rho_star = 1e-8;
  double gamma = 1e-3;
};

inline std::vector<std::string> exadmm_hyperparam_errors(
    const ExAdmmHyperParams& hp) {
  std::vector<std::string> errors = hyperparam_errors(hp.base);
  if (!(hp.lambda_ex_star >= 0) || !std::isfinite(hp.lambda_ex_star)) {
    errors.push_back(
        fmt::format("lambda_ex_star must be >= 0 (got {})", hp.lambda_ex_star));
  }
  if (!(hp.rho_star > 0) || !std::isfinite(hp.rho_star)) {
    errors.push_back(fmt::format("rho_star must be > 0 (got {})", hp.rho_star));
  }
  if (!(hp.gamma > 0) || !std::isfinite(hp.gamma)) {
    errors.push_back(fmt::format("gamma must be > 0 (got {})", hp.gamma));
  }
  return errors;
}

inline void validate_exadmm_hyperparams(const ExAdmmHyperParams& hp) {
  auto errors = exadmm_hyperparam_errors(hp);
  if (errors.empty()) return;
  std::string joined;
  for (const auto& e : errors) {
    if (!joined.empty()) joined += "; ";
    joined += e;
  }
  throw ConfigError("invalid hyperparameters: " + joined);
}

// Working-scale parameters for a concrete user count.
struct ExAdmmDerived {
  double alpha0 = 0;
  double lambda_ex = 0;
  double rho = 0;
  double gamma = 0;
};

inline ExAdmmDerived reparametrize(const ExAdmmHyperParams& hp, int n_users) {
  if (!(hp.rho_star > 0)) {
    throw ConfigError(
        fmt::format("rho_star must be > 0 (got {})", hp.rho_star));
  }
  if (n_users < 1) {
    throw ConfigError(fmt::format("n_users must be >= 1 (got {})", n_users));
  }
  double scale = static_cast<double>(n_users) * n_users;
  ExAdmmDerived dp;
  dp.alpha0 = hp.base.alpha0;
  dp.lambda_ex = hp.lambda_ex_star * scale;
  dp.rho = hp.rho_star * scale;
  dp.gamma = hp.gamma;
  return dp;
}

struct ExAdmmState {
  EmbeddingMatrix U;
  EmbeddingMatrix V;
  Vector s;
  Vector w;
  int epoch = 0;
};

// Fresh state: Gaussian embeddings from two separate streams, s seeded with
// the initial user mean, w at zero.
inline ExAdmmState init_exadmm(const FeedbackMatrix& m,
                               const ExAdmmHyperParams& hp) {
  ExAdmmState st;
  st.U = init_embeddings(m.n_users, hp.base.d, hp.base.sigma, hp.base.seed);
  st.V = init_embeddings(m.n_items, hp.base.d, hp.base.sigma, hp.base.seed + 1);
  st.s = column_sum(st.U) / static_cast<double>(m.n_users);
  st.w = Vector::Zero(hp.base.d);
  st.epoch = 0;
  return st;
}

// Item-row solve with the exposure term: the system matrix gains a rank-one
// lambda_ex s s' on top of the usual alpha0 G_U base. With lambda_ex = 0 the
// arithmetic is exactly the plain row solve.
inline Vector update_v_row(const std::vector<int>& interacted_users,
                           const EmbeddingMatrix& u, const Matrix& g_u,
                           const Vector& s, double alpha0, double lambda_ex,
                           double lambda_j, SweepOps* ops = nullptr) {
  Matrix base = alpha0 * g_u;
  if (lambda_ex != 0.0) {
    base.selfadjointView<Eigen::Lower>().rankUpdate(s, lambda_ex);
    if (ops) ops->rank1_updates += 1;
  }
  return solve_row(interacted_users, u, base, lambda_j, ops);
}

// Gradient of the loss restricted to user row i:
//   (sum_j r_ij v_j v_j' + alpha0 G_V + lambda_i I) u_i - sum_j r_ij v_j,
// evaluated without forming the row system: one G_V matrix-vector product
// plus O(d) per interaction.
inline Vector gradient_u_row(const std::vector<int>& interacted_items,
                             const EmbeddingMatrix& v, const Matrix& g_v,
                             const Vector& u_i, double alpha0, double lambda_i,
                             SweepOps* ops = nullptr) {
  Vector grad = alpha0 * (g_v * u_i) + lambda_i * u_i;
  for (int j : interacted_items) {
    double pred = v.row(j).dot(u_i);
    grad += (pred - 1.0) * v.row(j).transpose();
  }
  if (ops) {
    ops->matvecs += 1;
    ops->vector_ops += 2 * interacted_items.size() + 1;
  }
  return grad;
}

// Proximal step on the whole user block. The coupling matrix
// (rho/|U|^2) 11' + (1/gamma) I is identity plus rank-one, so its inverse
// acts in three O(|U| d) sweeps: shift every row by (rho gamma/|U|)(s - w),
// accumulate the row sum t, then subtract a common multiple of t. Nothing of
// size |U| x |U| is ever formed.
inline void proximal_map_inplace(EmbeddingMatrix& u, const Vector& s,
                                 const Vector& w, double rho, double gamma,
                                 int threads = 1, SweepOps* ops = nullptr) {
  const int n = static_cast<int>(u.rows());
  const double dn = static_cast<double>(n);
  Vector shift = (rho * gamma / dn) * (s - w);
  parallel_rows(n, threads, [&](int i) { u.row(i) += shift.transpose(); });
  Vector t = column_sum(u, threads, ops);
  double coef = 1.0 / (dn * dn * (1.0 / dn + 1.0 / (rho * gamma)));
  Vector correction = coef * t;
  parallel_rows(n, threads, [&](int i) { u.row(i) -= correction.transpose(); });
  if (ops) ops->vector_ops += 2 * static_cast<std::uint64_t>(n);
}

inline EmbeddingMatrix proximal_map(const EmbeddingMatrix& u_tilde,
                                    const Vector& s, const Vector& w,
                                    double rho, double gamma, int threads = 1,
                                    SweepOps* ops = nullptr) {
  EmbeddingMatrix out = u_tilde;
  proximal_map_inplace(out, s, w, rho, gamma, threads, ops);
  return out;
}

// Linearized user update: one gradient step per row against the fresh item
// Gramian, then the proximal correction that enforces the coupling to s.
inline void update_u(ExAdmmState& st, const FeedbackMatrix& m,
                     const TikhonovWeights& wts, const ExAdmmDerived& dp,
                     const Matrix& g_v, int threads = 1,
                     SweepOps* ops = nullptr) {
  parallel_rows(m.n_users, threads, [&](int i) {
    Vector u_i = st.U.row(i).transpose();
    Vector grad = gradient_u_row(m.by_user[i], st.V, g_v, u_i, dp.alpha0,
                                 wts.user(i), ops);
    st.U.row(i) = (u_i - dp.gamma * grad).transpose();
  });
  proximal_map_inplace(st.U, st.s, st.w, dp.rho, dp.gamma, threads, ops);
}

// Closed-form s update: rho (lambda_ex G_V + rho I)^-1 (mean + w), reusing
// the item Gramian already computed this epoch.
inline Vector update_s(const Matrix& g_v, const EmbeddingMatrix& u,
                       const Vector& w, double lambda_ex, double rho,
                       int threads = 1, SweepOps* ops = nullptr) {
  const int d = static_cast<int>(g_v.rows());
  Vector mean = column_sum(u, threads, ops) / static_cast<double>(u.rows());
  Eigen::MatrixXd h = lambda_ex * g_v;
  h.diagonal().array() += rho;
  if (ops) ops->spd_solves += 1;
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(h);
  if (llt.info() != Eigen::Success) {
    throw Error(fmt::format(
        "coupling system is not positive definite (d={}, rho={})", d, rho));
  }
  return llt.solve(rho * (mean + w));
}

// Scaled dual ascent: w moves by the primal residual mean(U) - s.
inline Vector update_w(const Vector& w, const EmbeddingMatrix& u,
                       const Vector& s, int threads = 1,
                       SweepOps* ops = nullptr) {
  Vector mean = column_sum(u, threads, ops) / static_cast<double>(u.rows());
  return w + mean - s;
}

struct EpochResiduals {
  double residual_v = 0;
  double residual_u = 0;
  double residual_s = 0;
  double residual_w = 0;
};

// One full epoch: item sweep (with the rank-one exposure term), user
// gradient-plus-prox sweep, s solve, dual step. Gramians are computed once
// and shared; the item Gramian feeds both the user sweep and the s solve.
inline EpochResiduals exadmm_epoch(ExAdmmState& st, const FeedbackMatrix& m,
                                   const TikhonovWeights& wts,
                                   const ExAdmmDerived& dp, int threads = 1,
                                   EpochOps* ops = nullptr) {
  SweepOps* iops = ops ? &ops->item_sweep : nullptr;
  SweepOps* uops = ops ? &ops->user_sweep : nullptr;
  SweepOps* cops = ops ? &ops->coupling : nullptr;

  Matrix g_u = gramian(st.U, threads, iops);
  Matrix base = dp.alpha0 * g_u;
  if (dp.lambda_ex != 0.0) {
    base.selfadjointView<Eigen::Lower>().rankUpdate(st.s, dp.lambda_ex);
    if (iops) iops->rank1_updates += 1;
  }
  Vector v_diff(m.n_items);
  parallel_rows(m.n_items, threads, [&](int j) {
    Vector next = solve_row(m.by_item[j], st.U, base, wts.item(j), iops);
    v_diff(j) = (st.V.row(j).transpose() - next).squaredNorm();
    st.V.row(j) = next.transpose();
  });

  Matrix g_v = gramian(st.V, threads, uops);
  EmbeddingMatrix u_prev = st.U;
  update_u(st, m, wts, dp, g_v, threads, uops);

  Vector mean = column_sum(st.U, threads, cops) / static_cast<double>(m.n_users);
  Vector s_next = [&] {
    Eigen::MatrixXd h = dp.lambda_ex * g_v;
    h.diagonal().array() += dp.rho;
    if (cops) cops->spd_solves += 1;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(h);
    if (llt.info() != Eigen::Success) {
      throw Error("coupling system is not positive definite");
    }
    return Vector(llt.solve(dp.rho * (mean + st.w)));
  }();
  Vector w_next = st.w + mean - s_next;

  EpochResiduals res;
  res.residual_v = std::sqrt(v_diff.sum());
  res.residual_u = (st.U - u_prev).norm();
  res.residual_s = (s_next - st.s).norm();
  res.residual_w = (w_next - st.w).norm();
  st.s = s_next;
  st.w = w_next;
  st.epoch += 1;
  return res;
}

// Running Frobenius-norm bounds on the iterates, feeding the step-size and
// penalty conditions below. These are observed maxima, not a priori bounds,
// so violations of the derived conditions are reported, never enforced.
struct ConvergenceBounds {
  double c_v = 0;
  double c_u = 0;
  double c_s = 0;
  double gamma_max = 0;
  double rho_min = 0;

  void observe(const EmbeddingMatrix& u, const EmbeddingMatrix& v,
               const Vector& s) {
    c_u = std::max(c_u, u.squaredNorm());
    c_v = std::max(c_v, v.squaredNorm());
    c_s = std::max(c_s, s.squaredNorm());
  }
};

// Largest step size with a descent guarantee:
// 1 / (sqrt(|U|) ((1 + alpha0) C_V + max_i lambda_i) + 1).
inline double gamma_upper_bound(const ConvergenceBounds& b, double alpha0,
                                double lambda_u_max, int n_users) {
  return 1.0 / (std::sqrt(static_cast<double>(n_users)) *
                    ((1.0 + alpha0) * b.c_v + lambda_u_max) +
                1.0);
}

// Smallest penalty with a descent guarantee:
// max(24 lambda_ex^2 C_V C_s / min_j lambda_j, 1/2 + sqrt(1/4 + 6 lambda_ex^2 C_V^2)).
inline double rho_lower_bound(const ConvergenceBounds& b, double lambda_ex,
                              double lambda_v_min) {
  double first = 24.0 * lambda_ex * lambda_ex * b.c_v * b.c_s / lambda_v_min;
  double second =
      0.5 + std::sqrt(0.25 + 6.0 * lambda_ex * lambda_ex * b.c_v * b.c_v);
  return std::max(first, second);
}

}  // namespace fairals
