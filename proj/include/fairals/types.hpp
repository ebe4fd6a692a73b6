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

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fairals {

// All dense linear algebra runs in float64. Gramians and the d x d normal
// equations accumulate enough terms that float32 would erode the monotonicity
// and stationarity checks the solvers are tested against.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// One row per user (or item); row-major so a row's d coefficients are
// contiguous during the row-parallel sweeps.
using EmbeddingMatrix = Matrix;

// Runtime failure: broken IO mid-run, numerical breakdown, corrupt files.
// The CLI maps this to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller mistake: unreadable input paths, malformed config, invalid
// hyperparameters, incompatible artifacts. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fairals
