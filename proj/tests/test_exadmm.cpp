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

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "fairals/exadmm.hpp"
#include "fairals/ials.hpp"
#include "oracles.hpp"
#include "support.hpp"

using fairals::ConvergenceBounds;
using fairals::EmbeddingMatrix;
using fairals::EpochOps;
using fairals::ExAdmmDerived;
using fairals::ExAdmmHyperParams;
using fairals::ExAdmmState;
using fairals::FeedbackMatrix;
using fairals::Matrix;
using fairals::TikhonovWeights;
using fairals::Vector;

namespace {

ExAdmmHyperParams toy_hp(int d) {
  ExAdmmHyperParams hp;
  hp.base.d = d;
  hp.base.alpha0 = 0.2;
  hp.base.lambda_l2 = 0.05;
  hp.base.eta = 1.0;
  hp.base.sigma = 0.1;
  hp.base.epochs = 5;
  hp.base.seed = 3;
  hp.lambda_ex_star = 1e-3;
  hp.rho_star = 1e-2;
  hp.gamma = 0.05;
  return hp;
}

struct RefState {
  Matrix u, v;
  Vector s, w;
};

// Straight-line serial re-implementation of one full epoch, using explicit
// matrix inverses throughout. Kept deliberately dumb so it can only be right
// for one reason.
RefState reference_epoch(const FeedbackMatrix& m, const RefState& in,
                         const TikhonovWeights& wts, double alpha0,
                         double lambda_ex, double rho, double gamma) {
  const int n = m.n_users;
  const int d = static_cast<int>(in.u.cols());
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd g_u = in.u.transpose() * in.u;
  Eigen::MatrixXd g_s = in.s * in.s.transpose();

  RefState out;
  out.v.resize(m.n_items, d);
  for (int j = 0; j < m.n_items; ++j) {
    Eigen::MatrixXd h = alpha0 * g_u + lambda_ex * g_s + wts.item(j) * eye;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (int i : m.by_item[j]) {
      h += in.u.row(i).transpose() * in.u.row(i);
      b += in.u.row(i).transpose();
    }
    out.v.row(j) = (h.inverse() * b).transpose();
  }

  Eigen::MatrixXd g_v = out.v.transpose() * out.v;
  Matrix u_hat(n, d);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd h = alpha0 * g_v + wts.user(i) * eye;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (int j : m.by_user[i]) {
      h += out.v.row(j).transpose() * out.v.row(j);
      b += out.v.row(j).transpose();
    }
    Eigen::VectorXd grad = h * in.u.row(i).transpose() - b;
    u_hat.row(i) = in.u.row(i) - gamma * grad.transpose() +
                   (rho * gamma / n) * (in.s - in.w).transpose();
  }
  Eigen::VectorXd t = u_hat.colwise().sum().transpose();
  double coef =
      1.0 / (static_cast<double>(n) * n * (1.0 / n + 1.0 / (rho * gamma)));
  out.u.resize(n, d);
  for (int i = 0; i < n; ++i) out.u.row(i) = u_hat.row(i) - coef * t.transpose();

  Eigen::VectorXd mean = out.u.colwise().sum().transpose() / n;
  out.s = rho * ((lambda_ex * g_v + rho * eye).inverse() * (mean + in.w));
  out.w = in.w + mean - out.s;
  return out;
}

}  // namespace

TEST_SUITE("exadmm") {

TEST_CASE("reparametrize applies the user-count-squared scale") {
  ExAdmmHyperParams hp = toy_hp(4);
  hp.lambda_ex_star = 1e-10;
  hp.rho_star = 2e-9;
  ExAdmmDerived dp = fairals::reparametrize(hp, 100000);
  CHECK(dp.lambda_ex == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dp.rho == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(dp.gamma == hp.gamma);
  CHECK(dp.alpha0 == hp.base.alpha0);

  hp.lambda_ex_star = 2e-4;
  ExAdmmDerived unit = fairals::reparametrize(hp, 1);
  CHECK(unit.lambda_ex == 2e-4);

  hp.rho_star = 0.0;
  CHECK_THROWS_AS(fairals::reparametrize(hp, 10), fairals::ConfigError);
}

TEST_CASE("hyperparameter validation reports offending fields") {
  ExAdmmHyperParams hp = toy_hp(4);
  hp.lambda_ex_star = -1.0;
  hp.rho_star = 0.0;
  hp.gamma = 0.0;
  hp.base.alpha0 = -2.0;
  std::vector<std::string> errors = fairals::exadmm_hyperparam_errors(hp);
  CHECK(errors.size() == 4);
  std::string joined;
  for (const auto& e : errors) joined += e + "; ";
  for (const char* field : {"lambda_ex_star", "rho_star", "gamma", "alpha0"}) {
    CAPTURE(field);
    CHECK(joined.find(field) != std::string::npos);
  }
  CHECK_THROWS_AS(fairals::validate_exadmm_hyperparams(hp), fairals::ConfigError);
  CHECK(fairals::exadmm_hyperparam_errors(toy_hp(4)).empty());
}

TEST_CASE("v row update matches the scalar hand case") {
  EmbeddingMatrix u(1, 1);
  u << 1.0;
  Matrix g_u = fairals::gramian(u);
  Vector s(1);
  s << 1.0;
  Vector v = fairals::update_v_row({0}, u, g_u, s, 0.0, 1.0, 1.0);
  // (1 + 0 + 1 + 1)^-1 * 1 = 1/3.
  CHECK(v(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("v row update with the exposure term off reproduces the plain row solve") {
  EmbeddingMatrix u = oracle::random_embeddings(15, 4, 0.7, 19);
  Matrix g_u = fairals::gramian(u);
  Vector s = oracle::random_embeddings(1, 4, 1.0, 20).row(0).transpose();
  std::vector<int> users = {0, 2, 3, 8, 14};

  Vector with_zero = fairals::update_v_row(users, u, g_u, s, 0.3, 0.0, 0.6);
  Vector plain = fairals::solve_user_row(users, u, g_u, 0.3, 0.6);
  CHECK(with_zero == plain);
}

TEST_CASE("v row update matches the dense minimizer") {
  EmbeddingMatrix u = oracle::random_embeddings(12, 4, 0.8, 23);
  Matrix g_u = fairals::gramian(u);
  Vector s = oracle::random_embeddings(1, 4, 1.2, 24).row(0).transpose();
  std::vector<int> users = {1, 4, 5, 9};
  double alpha0 = 0.25, lambda_ex = 0.8, lambda_j = 0.4;

  Vector got = fairals::update_v_row(users, u, g_u, s, alpha0, lambda_ex, lambda_j);

  Eigen::MatrixXd h = alpha0 * Eigen::MatrixXd(g_u) +
                      lambda_ex * s * s.transpose() +
                      lambda_j * Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4);
  for (int i : users) {
    h += u.row(i).transpose() * u.row(i);
    b += u.row(i).transpose();
  }
  Vector want = h.inverse() * b;
  CHECK(oracle::rel_err(got, want) <= 1e-8);
  CHECK((h * got - b).norm() <= 1e-8 * (1.0 + got.norm()));
}

TEST_CASE("gradient of a user row vanishes at the row solution") {
  EmbeddingMatrix v = oracle::random_embeddings(18, 4, 0.6, 29);
  Matrix g_v = fairals::gramian(v);
  std::vector<int> items = {0, 3, 7, 12, 17};
  double alpha0 = 0.2, lambda = 0.3;

  Vector u_star = fairals::solve_user_row(items, v, g_v, alpha0, lambda);
  Vector grad = fairals::gradient_u_row(items, v, g_v, u_star, alpha0, lambda);
  CHECK(grad.norm() <= 1e-8);
}

TEST_CASE("gradient at zero with one item is the negated embedding") {
  EmbeddingMatrix v = oracle::random_embeddings(5, 3, 1.0, 31);
  Matrix g_v = fairals::gramian(v);
  Vector zero = Vector::Zero(3);
  Vector grad = fairals::gradient_u_row({2}, v, g_v, zero, 0.4, 0.9);
  CHECK(oracle::rel_err(grad, Vector(-v.row(2).transpose())) <= 1e-14);
}

TEST_CASE("gradient matches central finite differences") {
  EmbeddingMatrix v = oracle::random_embeddings(16, 5, 1.0, 37);
  Matrix g_v = fairals::gramian(v);
  std::vector<int> items = {1, 2, 6, 10, 15};
  double alpha0 = 0.3, lambda = 0.7;
  Vector u = oracle::random_embeddings(1, 5, 1.0, 38).row(0).transpose();

  Vector got = fairals::gradient_u_row(items, v, g_v, u, alpha0, lambda);
  Vector fd = oracle::fd_gradient(
      [&](const Vector& x) {
        return oracle::user_row_objective(x, items, v, alpha0, lambda);
      },
      u, 1e-5);
  CHECK((got - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
}

TEST_CASE("proximal map reduces to the identity as the penalty vanishes") {
  EmbeddingMatrix u_tilde = oracle::random_embeddings(30, 4, 1.0, 41);
  Vector s = oracle::random_embeddings(1, 4, 1.0, 42).row(0).transpose();
  Vector w = oracle::random_embeddings(1, 4, 1.0, 43).row(0).transpose();
  EmbeddingMatrix out = fairals::proximal_map(u_tilde, s, w, 1e-12, 0.5);
  CHECK((out - u_tilde).norm() <= 1e-6 * u_tilde.norm());
}

TEST_CASE("proximal map scalar case") {
  EmbeddingMatrix u_tilde(1, 1);
  u_tilde << 0.8;
  Vector s(1), w(1);
  s << 1.5;
  w << 0.25;
  double rho = 2.0, gamma = 0.3;
  EmbeddingMatrix out = fairals::proximal_map(u_tilde, s, w, rho, gamma);
  double want = (0.8 / gamma + rho * (1.5 - 0.25)) / (1.0 / gamma + rho);
  CHECK(out(0, 0) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("proximal map matches the dense formula") {
  EmbeddingMatrix u_tilde = oracle::random_embeddings(50, 4, 1.0, 47);
  Vector s = oracle::random_embeddings(1, 4, 0.8, 48).row(0).transpose();
  Vector w = oracle::random_embeddings(1, 4, 0.8, 49).row(0).transpose();
  double rho = 1.7, gamma = 0.05;

  EmbeddingMatrix fast = fairals::proximal_map(u_tilde, s, w, rho, gamma);
  Matrix naive = oracle::naive_proximal_map(u_tilde, s, w, rho, gamma);
  CHECK(oracle::rel_frob(fast, naive) <= 1e-10);
}

TEST_CASE("user update is a no-op at zero step size") {
  FeedbackMatrix m = testsup::random_matrix(8, 6, 0.4, 53);
  ExAdmmHyperParams hp = toy_hp(3);
  TikhonovWeights wts = fairals::tikhonov_weights(m, hp.base);
  ExAdmmState st = fairals::init_exadmm(m, hp);
  EmbeddingMatrix before = st.U;

  ExAdmmDerived dp = fairals::reparametrize(hp, m.n_users);
  dp.gamma = 0.0;
  dp.rho = 1e-12;
  Matrix g_v = fairals::gramian(st.V);
  fairals::update_u(st, m, wts, dp, g_v);
  CHECK((st.U - before).norm() == 0.0);
}

TEST_CASE("a step-size-compliant gradient step decreases the loss") {
  FeedbackMatrix m = testsup::random_matrix(20, 15, 0.25, 59);
  ExAdmmHyperParams hp = toy_hp(3);
  TikhonovWeights wts = fairals::tikhonov_weights(m, hp.base);
  EmbeddingMatrix u = fairals::init_embeddings(20, 3, 0.2, 61);
  EmbeddingMatrix v = fairals::init_embeddings(15, 3, 0.2, 62);

  ConvergenceBounds bounds;
  bounds.observe(u, v, Vector::Zero(3));
  double gamma = fairals::gamma_upper_bound(bounds, hp.base.alpha0,
                                            wts.user.maxCoeff(), m.n_users);
  REQUIRE(gamma > 0);

  double before = fairals::ials_objective(m, u, v, wts, hp.base.alpha0);
  Matrix g_v = fairals::gramian(v);
  EmbeddingMatrix stepped = u;
  for (int i = 0; i < m.n_users; ++i) {
    Vector grad = fairals::gradient_u_row(m.by_user[i], v, g_v,
                                          u.row(i).transpose(), hp.base.alpha0,
                                          wts.user(i));
    stepped.row(i) = u.row(i) - gamma * grad.transpose();
  }
  double after = fairals::ials_objective(m, stepped, v, wts, hp.base.alpha0);
  CHECK(after < before);
}

TEST_CASE("user update matches a desk simulation of the gradient and prox steps") {
  FeedbackMatrix m = testsup::random_matrix(5, 4, 0.5, 67);
  ExAdmmHyperParams hp = toy_hp(3);
  TikhonovWeights wts = fairals::tikhonov_weights(m, hp.base);
  ExAdmmState st = fairals::init_exadmm(m, hp);
  st.w = oracle::random_embeddings(1, 3, 0.3, 68).row(0).transpose();
  ExAdmmDerived dp = fairals::reparametrize(hp, m.n_users);
  dp.lambda_ex = 0.9;
  dp.rho = 1.3;
  dp.gamma = 0.04;

  Matrix g_v = fairals::gramian(st.V);
  EmbeddingMatrix u0 = st.U;
  fairals::update_u(st, m, wts, dp, g_v);

  Matrix u_tilde(5, 3);
  for (int i = 0; i < 5; ++i) {
    Eigen::MatrixXd h = dp.alpha0 * Eigen::MatrixXd(g_v) +
                        wts.user(i) * Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
    for (int j : m.by_user[i]) {
      h += st.V.row(j).transpose() * st.V.row(j);
      b += st.V.row(j).transpose();
    }
    Eigen::VectorXd grad = h * u0.row(i).transpose() - b;
    u_tilde.row(i) = u0.row(i) - dp.gamma * grad.transpose();
  }
  Matrix want = oracle::naive_proximal_map(u_tilde, st.s, st.w, dp.rho, dp.gamma);
  CHECK(oracle::rel_frob(st.U, want) <= 1e-10);
}

TEST_CASE("coupling vector update hand cases") {
  EmbeddingMatrix u(2, 2);
  u << 1.0, 0.0, 3.0, 2.0;
  Matrix g_v = Matrix::Identity(2, 2);
  Vector w = Vector::Zero(2);

  // lambda_ex = 0 collapses the system to the identity.
  Vector s0 = fairals::update_s(g_v, u, w, 0.0, 0.7);
  Vector mean(2);
  mean << 2.0, 1.0;
  CHECK((s0 - mean).norm() <= 1e-14);

  // d=1 hand case: rho (lambda_ex G_V + rho)^-1 (mean + w) = 1/2.
  EmbeddingMatrix u1(1, 1);
  u1 << 1.0;
  Matrix g1(1, 1);
  g1 << 1.0;
  Vector w1 = Vector::Zero(1);
  Vector s1 = fairals::update_s(g1, u1, w1, 1.0, 1.0);
  CHECK(s1(0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("coupling vector minimizes its quadratic") {
  EmbeddingMatrix v = oracle::random_embeddings(10, 4, 0.9, 71);
  Matrix g_v = fairals::gramian(v);
  EmbeddingMatrix u = oracle::random_embeddings(14, 4, 0.9, 72);
  Vector w = oracle::random_embeddings(1, 4, 0.5, 73).row(0).transpose();
  double lambda_ex = 0.6, rho = 1.9;

  Vector got = fairals::update_s(g_v, u, w, lambda_ex, rho);
  Vector mean = u.colwise().sum().transpose() / u.rows();
  Eigen::MatrixXd h = lambda_ex * Eigen::MatrixXd(g_v) +
                      rho * Eigen::MatrixXd::Identity(4, 4);
  Vector want = h.inverse() * (rho * (mean + w));
  CHECK(oracle::rel_err(got, want) <= 1e-8);

  // Stationarity of (lambda_ex/2)|Vs|^2 + (rho/2)|mean - s + w|^2.
  Vector grad = lambda_ex * (g_v * got) - rho * (mean - got + w);
  CHECK(grad.norm() <= 1e-8 * (1.0 + got.norm()));
}

TEST_CASE("dual update accumulates the primal residual") {
  EmbeddingMatrix u(2, 2);
  u << 2.0, 0.0, 0.0, 0.0;
  Vector mean(2);
  mean << 1.0, 0.0;
  Vector w = Vector::Zero(2);

  Vector unchanged = fairals::update_w(w, u, mean);
  CHECK(unchanged.norm() == 0.0);

  Vector stepped = fairals::update_w(w, u, Vector(Vector::Zero(2)));
  CHECK(stepped(0) == 1.0);
  CHECK(stepped(1) == 0.0);
}

TEST_CASE("dual update cancels after an identity coupling solve") {
  EmbeddingMatrix u = oracle::random_embeddings(9, 3, 1.0, 79);
  Matrix g_v = fairals::gramian(oracle::random_embeddings(7, 3, 1.0, 80));
  Vector w = Vector::Zero(3);
  Vector s = fairals::update_s(g_v, u, w, 0.0, 1.0);
  Vector w_next = fairals::update_w(w, u, s);
  CHECK(w_next.norm() <= 1e-14);
}

TEST_CASE("initial state ties the coupling vector to the user mean") {
  FeedbackMatrix m = testsup::random_matrix(12, 9, 0.3, 83);
  ExAdmmHyperParams hp = toy_hp(4);
  ExAdmmState st = fairals::init_exadmm(m, hp);

  CHECK(st.epoch == 0);
  CHECK(st.w.norm() == 0.0);
  Vector mean = st.U.colwise().sum().transpose() / m.n_users;
  CHECK((st.s - mean).norm() <= 1e-14);
  CHECK(st.U.rows() == 12);
  CHECK(st.V.rows() == 9);
  // The two embedding blocks come from distinct random streams.
  CHECK(st.U.row(0) != st.V.row(0));
}

TEST_CASE("epoch matches a straight-line transcription") {
  FeedbackMatrix m = testsup::random_matrix(6, 5, 0.45, 89);
  ExAdmmHyperParams hp = toy_hp(3);
  TikhonovWeights wts = fairals::tikhonov_weights(m, hp.base);
  ExAdmmState st = fairals::init_exadmm(m, hp);
  st.w = oracle::random_embeddings(1, 3, 0.2, 90).row(0).transpose();
  ExAdmmDerived dp;
  dp.alpha0 = hp.base.alpha0;
  dp.lambda_ex = 0.8;
  dp.rho = 2.5;
  dp.gamma = 0.05;

  RefState ref_in{st.U, st.V, st.s, st.w};
  RefState ref = reference_epoch(m, ref_in, wts, dp.alpha0, dp.lambda_ex,
                                 dp.rho, dp.gamma);
  fairals::exadmm_epoch(st, m, wts, dp);

  CHECK(st.epoch == 1);
  CHECK(oracle::rel_frob(st.V, ref.v) <= 1e-10);
  CHECK(oracle::rel_frob(st.U, ref.u) <= 1e-10);
  CHECK(oracle::rel_err(st.s, ref.s) <= 1e-10);
  CHECK(oracle::rel_err(st.w, ref.w) <= 1e-10);
}

TEST_CASE("epoch residuals match direct state differences") {
  FeedbackMatrix m = testsup::random_matrix(10, 8, 0.3, 97);
  ExAdmmHyperParams hp = toy_hp(3);
  TikhonovWeights wts = fairals::tikhonov_weights(m, hp.base);
  ExAdmmState st = fairals::init_exadmm(m, hp);
  ExAdmmDerived dp;
  dp.alpha0 = hp.base.alpha0;
  dp.lambda_ex = 0.4;
  dp.rho = 1.2;
  dp.gamma = 0.03;

  ExAdmmState before = st;
  fairals::EpochResiduals res = fairals::exadmm_epoch(st, m, wts, dp);
  CHECK(std::abs(res.residual_v - (st.V - before.V).norm()) <= 1e-12);
  CHECK(std::abs(res.residual_u - (st.U - before.U).norm()) <= 1e-12);
  CHECK(std::abs(res.residual_s - (st.s - before.s).norm()) <= 1e-12);
  CHECK(std::abs(res.residual_w - (st.w - before.w).norm()) <= 1e-12);
}

TEST_CASE("epoch output is reproducible and tolerant of thread count") {
  FeedbackMatrix m = testsup::random_matrix(22, 17, 0.25, 101);
  ExAdmmHyperParams hp = toy_hp(4);
  TikhonovWeights wts = fairals::tikhonov_weights(m, hp.base);
  ExAdmmState a = fairals::init_exadmm(m, hp);
  ExAdmmState b = a;
  ExAdmmState p = a;
  ExAdmmDerived dp;
  dp.alpha0 = hp.base.alpha0;
  dp.lambda_ex = 0.5;
  dp.rho = 1.4;
  dp.gamma = 0.02;

  fairals::exadmm_epoch(a, m, wts, dp, 1);
  fairals::exadmm_epoch(b, m, wts, dp, 1);
  CHECK(a.U == b.U);
  CHECK(a.V == b.V);
  CHECK(a.s == b.s);
  CHECK(a.w == b.w);

  fairals::exadmm_epoch(p, m, wts, dp, 4);
  CHECK(oracle::rel_frob(p.U, a.U) <= 1e-12);
  CHECK(oracle::rel_frob(p.V, a.V) <= 1e-12);
  CHECK(oracle::rel_err(p.s, a.s) <= 1e-12);
}

TEST_CASE("step bound hand cases") {
  ConvergenceBounds b;
  b.c_v = 1.0;
  CHECK(fairals::gamma_upper_bound(b, 0.0, 0.0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  ConvergenceBounds zero;
  CHECK(fairals::gamma_upper_bound(zero, 0.0, 0.0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  ConvergenceBounds big;
  big.c_v = 10.0;
  CHECK(fairals::gamma_upper_bound(big, 0.0, 0.0, 1) <
        fairals::gamma_upper_bound(b, 0.0, 0.0, 1));
}

TEST_CASE("penalty bound hand cases") {
  ConvergenceBounds b;
  b.c_v = 1.0;
  b.c_s = 1.0;
  CHECK(fairals::rho_lower_bound(b, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fairals::rho_lower_bound(b, 1.0, 24.0) == doctest::Approx(3.0).epsilon(1e-15));

  // Quadratic growth once the first branch dominates.
  double lo = fairals::rho_lower_bound(b, 100.0, 1.0);
  double hi = fairals::rho_lower_bound(b, 200.0, 1.0);
  CHECK(hi / lo == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("convergence bounds track running maxima") {
  ConvergenceBounds b;
  EmbeddingMatrix u = oracle::random_embeddings(6, 3, 1.0, 103);
  EmbeddingMatrix v = oracle::random_embeddings(5, 3, 1.0, 104);
  Vector s = oracle::random_embeddings(1, 3, 1.0, 105).row(0).transpose();
  b.observe(u, v, s);
  CHECK(b.c_u == u.squaredNorm());
  CHECK(b.c_v == v.squaredNorm());
  CHECK(b.c_s == s.squaredNorm());

  // A smaller iterate must not shrink the recorded bound.
  b.observe(0.5 * u, 0.5 * v, Vector(0.5 * s));
  CHECK(b.c_u == u.squaredNorm());
  b.observe(2.0 * u, v, s);
  CHECK(b.c_u == 4.0 * u.squaredNorm());
}

TEST_CASE("epoch op counts show no cubic work in the user path") {
  FeedbackMatrix m = testsup::random_matrix(14, 11, 0.3, 107);
  ExAdmmHyperParams hp = toy_hp(4);
  TikhonovWeights wts = fairals::tikhonov_weights(m, hp.base);
  ExAdmmState st = fairals::init_exadmm(m, hp);
  ExAdmmDerived dp;
  dp.alpha0 = hp.base.alpha0;
  dp.lambda_ex = 0.5;
  dp.rho = 1.1;
  dp.gamma = 0.02;

  EpochOps ops;
  fairals::exadmm_epoch(st, m, wts, dp, 1, &ops);
  CHECK(ops.item_sweep.spd_solves.load() == 11);
  CHECK(ops.user_sweep.spd_solves.load() == 0);
  CHECK(ops.user_sweep.matvecs.load() >= 14);
  CHECK(ops.coupling.spd_solves.load() == 1);
}

}  // TEST_SUITE
