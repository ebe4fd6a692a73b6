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

#include <omp.h>

#include <utility>
#include <vector>

namespace fairals {

// Resolves a requested thread count: 0 (or negative) means all hardware
// threads, anything else is taken literally. Serial mode is threads == 1.
inline int resolve_threads(int requested) {
  return requested <= 0 ? omp_get_max_threads() : requested;
}

// Row sweep: body(i) for i in [0, n). Rows must not share writable state.
// Each row's arithmetic is self-contained, so results are bitwise identical
// for any thread count.
template <typename Body>
void parallel_rows(int n, int threads, Body&& body) {
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
  for (int i = 0; i < n; ++i) body(i);
}

// Contiguous [begin, end) blocks, one per thread, covering [0, n).
inline std::vector<std::pair<int, int>> thread_blocks(int n, int threads) {
  if (threads > n) threads = n < 1 ? 1 : n;
  std::vector<std::pair<int, int>> blocks;
  blocks.reserve(threads);
  int base = n / threads, extra = n % threads, start = 0;
  for (int t = 0; t < threads; ++t) {
    int len = base + (t < extra ? 1 : 0);
    blocks.emplace_back(start, start + len);
    start += len;
  }
  return blocks;
}

// Block reduction: fn(begin, end) produces one partial per block; partials
// are folded left-to-right in block order, so the result is deterministic
// for a fixed thread count (and exactly the serial order when threads == 1).
template <typename Partial, typename BlockFn>
Partial reduce_blocks(int n, int threads, Partial zero, BlockFn&& fn) {
  if (threads == 1 || n == 0) return n == 0 ? zero : fn(0, n);
  auto blocks = thread_blocks(n, threads);
  std::vector<Partial> parts(blocks.size(), zero);
  int nb = static_cast<int>(blocks.size());
#pragma omp parallel for schedule(static, 1) num_threads(nb)
  for (int b = 0; b < nb; ++b) {
    parts[b] = fn(blocks[b].first, blocks[b].second);
  }
  Partial acc = parts[0];
  for (int b = 1; b < nb; ++b) acc += parts[b];
  return acc;
}

}  // namespace fairals
