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

// Implicit-feedback alternating least squares with frequency-weighted
// Tikhonov regularization. The loss is
//
//   L(U, V) = 1/2 sum_{(i,j) observed} (1 - u_i' v_j)^2
//           + alpha0/2 * |U V'|_F^2
//           + 1/2 sum_i lambda_u(i) |u_i|^2 + 1/2 sum_j lambda_v(j) |v_j|^2
//
// where the alpha0 term scores every user-item pair. Both the row updates and
// the objective use the Gramian identity |U V'|_F^2 = tr(G_U G_V) to avoid
// touching all |U|*|V| pairs.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fairals/feedback.hpp"
#include "fairals/opcounts.hpp"
#include "fairals/parallel.hpp"
#include "fairals/types.hpp"

namespace fairals {

struct IalsHyperParams {
  int d = 32;
  double alpha0 = 0.1;
  double lambda_l2 = 0.003;
  double eta = 1.0;
  double sigma = 0.1;
  int epochs = 50;
  std::uint64_t seed = 0;
};

inline std::vector<std::string> hyperparam_errors(const IalsHyperParams& hp) {
  std::vector<std::string> errors;
  if (hp.d < 1) errors.push_back(fmt::format("d must be >= 1 (got {})", hp.d));
  if (!(hp.alpha0 > 0) || !std::isfinite(hp.alpha0)) {
    errors.push_back(fmt::format("alpha0 must be > 0 (got {})", hp.alpha0));
  }
  if (!(hp.lambda_l2 > 0) || !std::isfinite(hp.lambda_l2)) {
    errors.push_back(fmt::format("lambda_l2 must be > 0 (got {})", hp.lambda_l2));
  }
  if (!(hp.eta >= 0) || !std::isfinite(hp.eta)) {
    errors.push_back(fmt::format("eta must be >= 0 (got {})", hp.eta));
  }
  if (!(hp.sigma > 0) || !std::isfinite(hp.sigma)) {
    errors.push_back(fmt::format("sigma must be > 0 (got {})", hp.sigma));
  }
  if (hp.epochs < 1) {
    errors.push_back(fmt::format("epochs must be >= 1 (got {})", hp.epochs));
  }
  return errors;
}

inline void validate_hyperparams(const IalsHyperParams& hp) {
  auto errors = hyperparam_errors(hp);
  if (errors.empty()) return;
  std::string joined;
  for (const auto& e : errors) {
    if (!joined.empty()) joined += "; ";
    joined += e;
  }
  throw ConfigError("invalid hyperparameters: " + joined);
}

struct TikhonovWeights {
  Vector user;
  Vector item;
};

// Per-row regularization strength lambda_l2 * (count + alpha0 * opposite)^eta,
// where count is the row's interaction count and opposite the size of the
// other side of the matrix.
inline TikhonovWeights tikhonov_weights(const FeedbackMatrix& m,
                                        const IalsHyperParams& hp) {
  TikhonovWeights w;
  w.user.resize(m.n_users);
  w.item.resize(m.n_items);
  for (int i = 0; i < m.n_users; ++i) {
    double mass = static_cast<double>(m.by_user[i].size()) + hp.alpha0 * m.n_items;
    w.user(i) = hp.lambda_l2 * std::pow(mass, hp.eta);
  }
  for (int j = 0; j < m.n_items; ++j) {
    double mass = static_cast<double>(m.by_item[j].size()) + hp.alpha0 * m.n_users;
    w.item(j) = hp.lambda_l2 * std::pow(mass, hp.eta);
  }
  return w;
}

// Gaussian init with per-entry standard deviation sigma / sqrt(d), so row
// norms are O(sigma) independent of the embedding dimension.
inline EmbeddingMatrix init_embeddings(int n, int d, double sigma,
                                       std::uint64_t seed) {
  EmbeddingMatrix m(n, d);
  if (sigma == 0.0) {
    m.setZero();
    return m;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma / std::sqrt(static_cast<double>(d)));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) m(i, k) = dist(rng);
  }
  return m;
}

// E' E as a blocked parallel reduction. Costed as one d^2 accumulation per row.
inline Matrix gramian(const EmbeddingMatrix& e, int threads = 1,
                      SweepOps* ops = nullptr) {
  const int d = static_cast<int>(e.cols());
  Matrix g = reduce_blocks(
      static_cast<int>(e.rows()), threads, Matrix(Matrix::Zero(d, d)),
      [&](int lo, int hi) {
        Matrix part(d, d);
        auto block = e.middleRows(lo, hi - lo);
        part.noalias() = block.transpose() * block;
        return part;
      });
  if (ops) ops->rank1_updates += static_cast<std::uint64_t>(e.rows());
  return g;
}

// Column sums of E (that is, E' 1), blocked like the Gramian.
inline Vector column_sum(const EmbeddingMatrix& e, int threads = 1,
                         SweepOps* ops = nullptr) {
  const int d = static_cast<int>(e.cols());
  Vector t = reduce_blocks(
      static_cast<int>(e.rows()), threads, Vector(Vector::Zero(d)),
      [&](int lo, int hi) {
        Vector part = e.middleRows(lo, hi - lo).colwise().sum().transpose();
        return part;
      });
  if (ops) ops->vector_ops += static_cast<std::uint64_t>(e.rows());
  return t;
}

// Solves (base + lambda I + sum_{j in interacted} e_j e_j') x = sum e_j by
// Cholesky factorization of the d x d system. Only the lower triangle of the
// accumulated matrix is referenced.
inline Vector solve_row(const std::vector<int>& interacted,
                        const EmbeddingMatrix& other, const Matrix& base,
                        double lambda, SweepOps* ops = nullptr) {
  const int d = static_cast<int>(other.cols());
  Eigen::MatrixXd h = base;
  h.diagonal().array() += lambda;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (int j : interacted) {
    h.selfadjointView<Eigen::Lower>().rankUpdate(other.row(j).transpose(), 1.0);
    b += other.row(j).transpose();
  }
  if (ops) {
    ops->spd_solves += 1;
    ops->rank1_updates += interacted.size();
    ops->vector_ops += interacted.size();
  }
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(h);
  if (llt.info() != Eigen::Success) {
    throw Error(fmt::format(
        "row system is not positive definite (d={}, lambda={})", d, lambda));
  }
  return llt.solve(b);
}

// Closed-form row update: minimizes the user-row objective
// 1/2 sum_j (1 - u'v_j)^2 + alpha0/2 |V u|^2 + lambda_i/2 |u|^2.
inline Vector solve_user_row(const std::vector<int>& interacted_items,
                             const EmbeddingMatrix& v, const Matrix& g_v,
                             double alpha0, double lambda_i,
                             SweepOps* ops = nullptr) {
  Matrix base = alpha0 * g_v;
  return solve_row(interacted_items, v, base, lambda_i, ops);
}

inline void update_users(const FeedbackMatrix& m, EmbeddingMatrix& u,
                         const EmbeddingMatrix& v, const TikhonovWeights& w,
                         double alpha0, int threads = 1, SweepOps* ops = nullptr) {
  Matrix g_v = gramian(v, threads, ops);
  Matrix base = alpha0 * g_v;
  parallel_rows(m.n_users, threads, [&](int i) {
    u.row(i) = solve_row(m.by_user[i], v, base, w.user(i), ops).transpose();
  });
}

inline void update_items(const FeedbackMatrix& m, const EmbeddingMatrix& u,
                         EmbeddingMatrix& v, const TikhonovWeights& w,
                         double alpha0, int threads = 1, SweepOps* ops = nullptr) {
  Matrix g_u = gramian(u, threads, ops);
  Matrix base = alpha0 * g_u;
  parallel_rows(m.n_items, threads, [&](int j) {
    v.row(j) = solve_row(m.by_item[j], u, base, w.item(j), ops).transpose();
  });
}

// One training epoch: a full user sweep against the current items, then a
// full item sweep against the fresh users. Each sweep is an exact block
// minimization, so the objective cannot increase across either half.
inline void ials_epoch(const FeedbackMatrix& m, EmbeddingMatrix& u,
                       EmbeddingMatrix& v, const TikhonovWeights& w,
                       const IalsHyperParams& hp, int threads = 1,
                       EpochOps* ops = nullptr) {
  update_users(m, u, v, w, hp.alpha0, threads, ops ? &ops->user_sweep : nullptr);
  update_items(m, u, v, w, hp.alpha0, threads, ops ? &ops->item_sweep : nullptr);
}

// Training loss. The observed term walks the nonzeros; the alpha0 term uses
// tr(G_U G_V), so nothing of size |U| x |V| is ever formed.
inline double ials_objective(const FeedbackMatrix& m, const EmbeddingMatrix& u,
                             const EmbeddingMatrix& v, const TikhonovWeights& w,
                             double alpha0, int threads = 1) {
  double observed =
      reduce_blocks(m.n_users, threads, 0.0, [&](int lo, int hi) {
        double acc = 0;
        for (int i = lo; i < hi; ++i) {
          for (int j : m.by_user[i]) {
            double err = 1.0 - u.row(i).dot(v.row(j));
            acc += err * err;
          }
        }
        return acc;
      });
  Matrix g_u = gramian(u, threads);
  Matrix g_v = gramian(v, threads);
  double implicit = g_u.cwiseProduct(g_v).sum();
  double reg_u = reduce_blocks(m.n_users, threads, 0.0, [&](int lo, int hi) {
    double acc = 0;
    for (int i = lo; i < hi; ++i) acc += w.user(i) * u.row(i).squaredNorm();
    return acc;
  });
  double reg_v = reduce_blocks(m.n_items, threads, 0.0, [&](int lo, int hi) {
    double acc = 0;
    for (int j = lo; j < hi; ++j) acc += w.item(j) * v.row(j).squaredNorm();
    return acc;
  });
  return 0.5 * observed + 0.5 * alpha0 * implicit + 0.5 * reg_u + 0.5 * reg_v;
}

}  // namespace fairals
