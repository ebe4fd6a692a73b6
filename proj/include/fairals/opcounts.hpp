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

#include <atomic>
#include <cstdint>

namespace fairals {

// Arithmetic event tallies for one sweep, bucketed by how the event's cost
// scales with the embedding dimension d. Tests model a sweep's work as
//   spd_solves * d^3 + (rank1_updates + matvecs) * d^2 + vector_ops * d
// to verify complexity claims without relying on wall clocks.
struct SweepOps {
  std::atomic<std::uint64_t> spd_solves{0};     // d x d factor-and-solve
  std::atomic<std::uint64_t> rank1_updates{0};  // d x d outer-product adds
  std::atomic<std::uint64_t> matvecs{0};        // d x d matrix-vector products
  std::atomic<std::uint64_t> vector_ops{0};     // O(d) row operations

  void reset() {
    spd_solves = 0;
    rank1_updates = 0;
    matvecs = 0;
    vector_ops = 0;
  }

  double modeled_flops(int d) const {
    double dd = static_cast<double>(d);
    return static_cast<double>(spd_solves.load()) * dd * dd * dd +
           static_cast<double>(rank1_updates.load() + matvecs.load()) * dd *
               dd +
           static_cast<double>(vector_ops.load()) * dd;
  }
};

// Per-epoch tallies, split by phase so the user path can be shown to stay
// free of d^3 work while the item path pays one solve per item.
struct EpochOps {
  SweepOps item_sweep;  // V updates (and their Gramian accumulations)
  SweepOps user_sweep;  // U updates: gradients, shifts, prox corrections
  SweepOps coupling;    // epoch-level Gramians, s solve, w step

  void reset() {
    item_sweep.reset();
    user_sweep.reset();
    coupling.reset();
  }
};

}  // namespace fairals
