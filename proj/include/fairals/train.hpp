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

// Full training loops over the two solvers. Wall time is accumulated around
// the epoch calls only; objective evaluation, diagnostics, and logging stay
// outside the clock so timings compare solver cost, not instrumentation.

#pragma once

#include <chrono>
#include <vector>

#include "fairals/checkpoint.hpp"
#include "fairals/diagnostics.hpp"
#include "fairals/exadmm.hpp"
#include "fairals/feedback.hpp"
#include "fairals/ials.hpp"

namespace fairals {

struct TrainOptions {
  int threads = 1;
  // Fills the grad_norm_* diagnostic columns. Costs an extra pass over the
  // data per epoch, so it is off unless asked for.
  bool gradient_norms = false;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> objective;           // one entry per epoch (ials)
  std::vector<EpochDiagnostics> epoch_log; // one entry per epoch (exadmm)
  ConvergenceBounds bounds;                // running iterate norms (exadmm)
  double train_seconds = 0;
};

namespace detail {

class EpochTimer {
 public:
  void start() { t0_ = std::chrono::steady_clock::now(); }
  void stop() {
    total_ += std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0_)
                  .count();
  }
  double seconds() const { return total_; }

 private:
  std::chrono::steady_clock::time_point t0_;
  double total_ = 0;
};

}  // namespace detail

inline TrainResult train_ials(const FeedbackMatrix& m,
                              const IalsHyperParams& hp,
                              const TrainOptions& opts = {}) {
  validate_hyperparams(hp);
  TikhonovWeights wts = tikhonov_weights(m, hp);
  EmbeddingMatrix u = init_embeddings(m.n_users, hp.d, hp.sigma, hp.seed);
  EmbeddingMatrix v = init_embeddings(m.n_items, hp.d, hp.sigma, hp.seed + 1);

  TrainResult result;
  result.objective.reserve(hp.epochs);
  detail::EpochTimer timer;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    timer.start();
    ials_epoch(m, u, v, wts, hp, opts.threads);
    timer.stop();
    result.objective.push_back(
        ials_objective(m, u, v, wts, hp.alpha0, opts.threads));
  }
  result.train_seconds = timer.seconds();
  result.checkpoint.algo = "ials";
  result.checkpoint.base = hp;
  result.checkpoint.epoch = hp.epochs;
  result.checkpoint.U = std::move(u);
  result.checkpoint.V = std::move(v);
  return result;
}

inline TrainResult train_exadmm(const FeedbackMatrix& m,
                                const ExAdmmHyperParams& hp,
                                const TrainOptions& opts = {}) {
  validate_exadmm_hyperparams(hp);
  ExAdmmDerived dp = reparametrize(hp, m.n_users);
  TikhonovWeights wts = tikhonov_weights(m, hp.base);
  ExAdmmState st = init_exadmm(m, hp);

  TrainResult result;
  result.bounds.observe(st.U, st.V, st.s);
  const double lambda_u_max = wts.user.size() ? wts.user.maxCoeff() : 0.0;
  const double lambda_v_min = wts.item.size() ? wts.item.minCoeff() : 0.0;

  result.epoch_log.reserve(hp.base.epochs);
  detail::EpochTimer timer;
  for (int epoch = 0; epoch < hp.base.epochs; ++epoch) {
    timer.start();
    EpochResiduals res = exadmm_epoch(st, m, wts, dp, opts.threads);
    timer.stop();
    result.bounds.observe(st.U, st.V, st.s);

    EpochDiagnostics d;
    d.epoch = st.epoch;
    d.lagrangian = augmented_lagrangian(st, m, wts, dp, opts.threads);
    d.ials_loss = ials_objective(m, st.U, st.V, wts, dp.alpha0, opts.threads);
    d.r_ex = fairness_regularizer(st.U, st.V, opts.threads);
    d.residual_v = res.residual_v;
    d.residual_u = res.residual_u;
    d.residual_s = res.residual_s;
    d.residual_w = res.residual_w;
    Vector mean =
        column_sum(st.U, opts.threads) / static_cast<double>(m.n_users);
    d.feasibility_gap = (mean - st.s).norm();
    if (opts.gradient_norms) {
      GradientNorms g = gradient_norms(st, m, wts, dp, opts.threads);
      d.grad_norm_v = g.v;
      d.grad_norm_u = g.u;
      d.grad_norm_s = g.s;
      d.grad_norm_w = g.w;
    }
    d.gamma_ok = dp.gamma <= gamma_upper_bound(result.bounds, dp.alpha0,
                                               lambda_u_max, m.n_users);
    d.rho_ok = dp.rho >= rho_lower_bound(result.bounds, dp.lambda_ex,
                                         lambda_v_min);
    result.epoch_log.push_back(d);
  }
  result.train_seconds = timer.seconds();
  result.checkpoint.algo = "exadmm";
  result.checkpoint.base = hp.base;
  result.checkpoint.lambda_ex_star = hp.lambda_ex_star;
  result.checkpoint.rho_star = hp.rho_star;
  result.checkpoint.gamma = hp.gamma;
  result.checkpoint.epoch = st.epoch;
  result.checkpoint.U = std::move(st.U);
  result.checkpoint.V = std::move(st.V);
  result.checkpoint.s = std::move(st.s);
  result.checkpoint.w = std::move(st.w);
  return result;
}

}  // namespace fairals
