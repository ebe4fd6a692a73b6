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

// Model checkpoints: an 8-byte magic, a 4-byte little-endian header length,
// a key = value text header (algorithm, shapes, hyperparameters, epoch),
// then raw row-major float64 blocks: U, V, and for the ADMM variant s and w.
// Native byte order for the payload; these files move between runs on one
// machine, not between architectures.

#pragma once

#include <fmt/format.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fairals/exadmm.hpp"
#include "fairals/ials.hpp"
#include "fairals/types.hpp"
#include "fairals/util.hpp"

namespace fairals {

inline constexpr char kCheckpointMagic[8] = {'F', 'A', 'L', 'S',
                                             'C', 'K', 'P', 'T'};

struct Checkpoint {
  std::string algo;  // "ials" or "exadmm"
  IalsHyperParams base;
  double lambda_ex_star = 0;
  double rho_star = 0;
  double gamma = 0;
  int epoch = 0;
  EmbeddingMatrix U;
  EmbeddingMatrix V;
  Vector s;  // empty for ials
  Vector w;  // empty for ials
};

namespace detail {

inline void write_block(std::ofstream& out, const double* data,
                        std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

inline void read_block(std::ifstream& in, double* data, std::size_t count,
                       const std::string& path) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw Error("checkpoint truncated: " + path);
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  if (ckpt.algo != "ials" && ckpt.algo != "exadmm") {
    throw Error("unknown checkpoint algorithm: " + ckpt.algo);
  }
  KvList header = {
      {"format", "fairals-checkpoint-1"},
      {"algo", ckpt.algo},
      {"n_users", fmt::format("{}", ckpt.U.rows())},
      {"n_items", fmt::format("{}", ckpt.V.rows())},
      {"d", fmt::format("{}", ckpt.base.d)},
      {"alpha0", format_double(ckpt.base.alpha0)},
      {"lambda_l2", format_double(ckpt.base.lambda_l2)},
      {"eta", format_double(ckpt.base.eta)},
      {"sigma", format_double(ckpt.base.sigma)},
      {"epochs", fmt::format("{}", ckpt.base.epochs)},
      {"seed", fmt::format("{}", ckpt.base.seed)},
      {"epoch", fmt::format("{}", ckpt.epoch)},
  };
  if (ckpt.algo == "exadmm") {
    header.emplace_back("lambda_ex_star", format_double(ckpt.lambda_ex_star));
    header.emplace_back("rho_star", format_double(ckpt.rho_star));
    header.emplace_back("gamma", format_double(ckpt.gamma));
  }
  std::string header_text;
  for (const auto& [k, v] : header) header_text += k + " = " + v + "\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open checkpoint for writing: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  std::uint32_t len = static_cast<std::uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_text.data(), static_cast<std::streamsize>(len));
  detail::write_block(out, ckpt.U.data(), static_cast<std::size_t>(ckpt.U.size()));
  detail::write_block(out, ckpt.V.data(), static_cast<std::size_t>(ckpt.V.size()));
  if (ckpt.algo == "exadmm") {
    detail::write_block(out, ckpt.s.data(), static_cast<std::size_t>(ckpt.s.size()));
    detail::write_block(out, ckpt.w.data(), static_cast<std::size_t>(ckpt.w.size()));
  }
  if (!out) throw Error("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error("not a checkpoint file: " + path);
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len == 0 || len > (1u << 20)) {
    throw Error("corrupt checkpoint header: " + path);
  }
  std::string header_text(len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(len));
  if (!in) throw Error("checkpoint truncated: " + path);

  auto fields = kv_map(parse_kv_text(header_text, path));
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) {
      throw Error(fmt::format("checkpoint header missing '{}': {}", key, path));
    }
    return it->second;
  };
  auto need_int = [&](const std::string& key) {
    long long v = 0;
    if (!parse_int(need(key), &v)) {
      throw Error(fmt::format("bad integer '{}' in checkpoint header: {}", key,
                              path));
    }
    return v;
  };
  auto need_double = [&](const std::string& key) {
    double v = 0;
    if (!parse_double(need(key), &v)) {
      throw Error(fmt::format("bad number '{}' in checkpoint header: {}", key,
                              path));
    }
    return v;
  };

  if (need("format") != "fairals-checkpoint-1") {
    throw Error("unsupported checkpoint format: " + need("format"));
  }
  Checkpoint ckpt;
  ckpt.algo = need("algo");
  if (ckpt.algo != "ials" && ckpt.algo != "exadmm") {
    throw Error("unknown checkpoint algorithm: " + ckpt.algo);
  }
  const int n_users = static_cast<int>(need_int("n_users"));
  const int n_items = static_cast<int>(need_int("n_items"));
  ckpt.base.d = static_cast<int>(need_int("d"));
  if (n_users < 1 || n_items < 1 || ckpt.base.d < 1) {
    throw Error("checkpoint header has non-positive dimensions: " + path);
  }
  ckpt.base.alpha0 = need_double("alpha0");
  ckpt.base.lambda_l2 = need_double("lambda_l2");
  ckpt.base.eta = need_double("eta");
  ckpt.base.sigma = need_double("sigma");
  ckpt.base.epochs = static_cast<int>(need_int("epochs"));
  ckpt.base.seed = static_cast<std::uint64_t>(need_int("seed"));
  ckpt.epoch = static_cast<int>(need_int("epoch"));
  if (ckpt.algo == "exadmm") {
    ckpt.lambda_ex_star = need_double("lambda_ex_star");
    ckpt.rho_star = need_double("rho_star");
    ckpt.gamma = need_double("gamma");
  }

  ckpt.U.resize(n_users, ckpt.base.d);
  ckpt.V.resize(n_items, ckpt.base.d);
  detail::read_block(in, ckpt.U.data(), static_cast<std::size_t>(ckpt.U.size()), path);
  detail::read_block(in, ckpt.V.data(), static_cast<std::size_t>(ckpt.V.size()), path);
  if (ckpt.algo == "exadmm") {
    ckpt.s.resize(ckpt.base.d);
    ckpt.w.resize(ckpt.base.d);
    detail::read_block(in, ckpt.s.data(), static_cast<std::size_t>(ckpt.s.size()), path);
    detail::read_block(in, ckpt.w.data(), static_cast<std::size_t>(ckpt.w.size()), path);
  }
  if (!ckpt.U.allFinite() || !ckpt.V.allFinite()) {
    throw Error("checkpoint contains non-finite embeddings: " + path);
  }
  return ckpt;
}

}  // namespace fairals
