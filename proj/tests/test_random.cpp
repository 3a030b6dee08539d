// tests/test_random.cpp

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

#include <gtest/gtest.h>

#include <set>

#include "pmct/random.hpp"

using namespace pmct;

// Expected values below come from an independent Python implementation of
// FNV-1a, SplitMix64 and the reference MT19937-64 algorithm.

TEST(Rng, EngineIsStandardMt19937_64) {
  Rng rng(42);
  EXPECT_EQ(rng.next_u64(), 13930160852258120406ULL);
  EXPECT_EQ(rng.next_u64(), 11788048577503494824ULL);
  Rng u(42);
  EXPECT_EQ(u.uniform01(), 0.755155532954539);
  EXPECT_EQ(u.uniform01(), 0.6390313938546974);
}

TEST(Rng, DeriveSeedIsStable) {
  EXPECT_EQ(derive_seed(0, "a", 0), 982209080964714396ULL);
  EXPECT_EQ(derive_seed(42, "1089-134686-0000", 3), 17138858006098594535ULL);
  EXPECT_EQ(derive_seed(18446744073709551615ULL, "utt", 7), 14446866283998466515ULL);
}

TEST(Rng, DeriveSeedSeparatesFields) {
  // The separator keeps ("1", "2x") and ("12", "x") apart.
  EXPECT_NE(derive_seed(1, "2x", 0), derive_seed(12, "x", 0));
  std::set<std::uint64_t> seeds;
  for (int i = 0; i < 10000; ++i) seeds.insert(derive_seed(7, "utt-" + std::to_string(i), 0));
  EXPECT_EQ(seeds.size(), 10000u);
}

TEST(Rng, BelowIsInRangeAndCoversAllValues) {
  Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(rng.below(1), 0u);
  EXPECT_THROW(rng.below(0), Error);
}

TEST(Rng, BetweenIsInclusive) {
  Rng rng(2);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) seen.insert(rng.between(-2, 2));
  EXPECT_EQ(seen, (std::set<std::int64_t>{-2, -1, 0, 1, 2}));
  EXPECT_EQ(rng.between(5, 5), 5);
}

TEST(Rng, DegenerateBernoulliConsumesNothing) {
  Rng a(3), b(3);
  EXPECT_TRUE(a.bernoulli(1.0));
  EXPECT_FALSE(a.bernoulli(0.0));
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformDegenerateRangeIsExact) {
  Rng rng(4);
  EXPECT_EQ(rng.uniform(12.5, 12.5), 12.5);
}
