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

#include <fmt/core.h>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairals/types.hpp"

namespace fairals {

inline std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(const std::string& s, double* out) {
  std::string t = trim(s);
  if (t.empty()) return false;
  try {
    size_t used = 0;
    *out = std::stod(t, &used);
    return used == t.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline bool parse_int(const std::string& s, long long* out) {
  std::string t = trim(s);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = b + t.size();
  auto r = std::from_chars(b, e, *out);
  return r.ec == std::errc() && r.ptr == e;
}

// 64-bit FNV-1a. Used for content fingerprints and seeded id hashing; not a
// cryptographic hash, just a stable one.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 1469598103934665603ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Seeded hash of an external id: the seed is folded in byte by byte so that
// nearby seeds produce unrelated orderings.
inline std::uint64_t seeded_id_hash(std::uint64_t seed, std::string_view id) {
  char seed_bytes[8];
  for (int i = 0; i < 8; ++i) {
    seed_bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
  }
  std::uint64_t h = fnv1a64(std::string_view(seed_bytes, 8));
  return fnv1a64(id, h);
}

// Flat key-value files: one `key = value` per line, '#' starts a comment.
// Order is preserved on write so fingerprints are stable.
using KvList = std::vector<std::pair<std::string, std::string>>;

inline KvList parse_kv_text(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  KvList kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(
          fmt::format("{}:{}: expected `key = value`, got `{}`", name, lineno, t));
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(fmt::format("{}:{}: empty key", name, lineno));
    }
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

inline KvList read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv_text(ss.str(), path);
}

inline std::map<std::string, std::string> kv_map(const KvList& kv) {
  std::map<std::string, std::string> m;
  for (const auto& [k, v] : kv) m[k] = v;
  return m;
}

inline void write_kv_file(const std::string& path, const KvList& kv) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path));
  for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
  if (!out) throw Error(fmt::format("write failed for {}", path));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::uint64_t file_fingerprint(const std::string& path) {
  return fnv1a64(read_file(path));
}

// Canonical number formatting for manifests and config ids: shortest form
// that round-trips a float64.
inline std::string format_double(double x) { return fmt::format("{:.17g}", x); }

inline void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error(fmt::format("cannot create directory {}: {}", path,
                                  ec.message()));
}

}  // namespace fairals
