// pmct/random.hpp

// Copyright 2026  The pmct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "pmct/error.hpp"

namespace pmct {

/// Seeded generator with a fixed, documented mapping from raw 64-bit
/// engine outputs to the variates the pipeline needs. The standard
/// distributions are deliberately not used: their algorithms are
/// implementation-defined and would break cross-platform reproducibility.
///
/// Engine: std::mt19937_64 seeded with a single 64-bit value.
///   uniform01()   = (next >> 11) * 2^-53, in [0, 1)
///   uniform(a, b) = a + (b - a) * uniform01()
///   below(n)      = rejection sampling: draw r until r >= (2^64 - n) mod n,
///                   return r mod n
///   bernoulli(p)  = uniform01() < p; p <= 0 and p >= 1 consume no draw
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "Rng::below(0)");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) fail(ErrorCode::InvalidArgument, "Rng::between with hi < lo");
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

 private:
  std::mt19937_64 engine_;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-utterance seed: mix64(fnv1a64("<global_seed>\x1f<id>\x1f<epoch>")),
/// with both integers in base-10 ASCII and the id as raw UTF-8 bytes.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view id,
                                 std::uint64_t epoch) {
  std::string key = std::to_string(global_seed);
  key.push_back('\x1f');
  key.append(id);
  key.push_back('\x1f');
  key += std::to_string(epoch);
  return mix64(fnv1a64(key));
}

}  // namespace pmct
