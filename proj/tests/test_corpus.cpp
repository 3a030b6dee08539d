// tests/test_corpus.cpp

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

#include <cmath>
#include <set>
#include <sstream>

#include "pmct/corpus.hpp"

using namespace pmct;

namespace {

ResourcePool pool(ResourceKind kind, std::size_t n) {
  ResourcePool p;
  p.kind = kind;
  for (std::size_t i = 0; i < n; ++i) p.entries.push_back({"r" + std::to_string(i), "r.wav"});
  return p;
}

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected pmct::Error";
  return Error(ErrorCode::InvalidArgument, "none");
}

}  // namespace

TEST(Manifest, TwoLinesInOrder) {
  std::istringstream in(
      R"({"id": "b", "audio_path": "b.wav", "transcript": "HELLO  world", "duration_s": 2.5})"
      "\n"
      R"({"id": "a", "audio_path": "/abs/a.wav"})"
      "\n");
  const auto m = parse_manifest(in);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].id, "b");
  EXPECT_EQ(m[0].transcript, "HELLO  world");
  EXPECT_EQ(m[0].duration_s, 2.5);
  EXPECT_EQ(m[1].id, "a");
  EXPECT_FALSE(m[1].transcript);
  EXPECT_FALSE(m[1].duration_s);
}

TEST(Manifest, DuplicateIdReportsLine) {
  std::ostringstream text;
  for (int i = 1; i <= 6; ++i) text << R"({"id": "u)" << i << R"(", "audio_path": "x.wav"})" << "\n";
  text << R"({"id": "u3", "audio_path": "y.wav"})" << "\n";
  std::istringstream in(text.str());
  const Error e = error_of([&] { parse_manifest(in, "m.jsonl"); });
  EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
  EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos) << e.what();
}

TEST(Manifest, EmptyFileIsEmptyList) {
  std::istringstream in("");
  EXPECT_TRUE(parse_manifest(in).empty());
  std::istringstream blank("\n  \n");
  EXPECT_TRUE(parse_manifest(blank).empty());
}

TEST(Manifest, ParseErrorsCarryLineNumbers) {
  const auto check = [](const std::string& text, const char* line) {
    std::istringstream in(text);
    const Error e = error_of([&] { parse_manifest(in); });
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find(line), std::string::npos) << e.what();
  };
  check("{\"id\": \"a\", \"audio_path\": \"a\"}\n{not json\n", "line 2");
  check("{\"audio_path\": \"a\"}\n", "line 1");
  check("{\"id\": 3, \"audio_path\": \"a\"}\n", "line 1");
  check("[1,2]\n", "line 1");
  check("\n\n{\"id\": \"a\", \"audio_path\": \"\"}\n", "line 3");
  check("{\"id\": \"a\", \"audio_path\": \"a\", \"duration_s\": \"long\"}\n", "line 1");
}

TEST(Pool, ParsesTabSeparatedLines) {
  std::istringstream in("# comment\nr1\trooms/r1.wav\n\nr2\t/abs/r2.wav\r\n");
  const ResourcePool p = parse_pool(in, ResourceKind::Rir);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.entries[0].id, "r1");
  EXPECT_EQ(p.entries[0].path, "rooms/r1.wav");
  EXPECT_EQ(p.entries[1].path, "/abs/r2.wav");
  std::istringstream bad("r1 rooms/r1.wav\n");
  EXPECT_EQ(error_of([&] { parse_pool(bad, ResourceKind::Rir); }).code(), ErrorCode::ParseError);
  std::istringstream dup("a\tx\na\ty\n");
  EXPECT_EQ(error_of([&] { parse_pool(dup, ResourceKind::Noise); }).code(), ErrorCode::DuplicateId);
}

TEST(Paths, RelativeToRoot) {
  EXPECT_EQ(resolve_path("/data", "a/b.wav"), std::filesystem::path("/data/a/b.wav"));
  EXPECT_EQ(resolve_path("/data", "/x/b.wav"), std::filesystem::path("/x/b.wav"));
  EXPECT_EQ(resolve_path("", "a.wav"), std::filesystem::path("a.wav"));
}

TEST(SampleResources, ForcedChoiceStillVariesSnrWithEpoch) {
  const ResourcePool r = pool(ResourceKind::Rir, 1), n = pool(ResourceKind::Noise, 1);
  const ManifestEntry e{"utt", "x.wav", {}, {}};
  std::set<double> snrs;
  for (std::uint64_t epoch = 0; epoch < 100; ++epoch) {
    const ResourceDraw d = sample_resources(e, r, n, {0.0, 30.0}, {7}, epoch);
    EXPECT_EQ(d.rir_index, 0u);
    EXPECT_EQ(d.noise_index, 0u);
    EXPECT_GE(d.snr_db, 0.0);
    EXPECT_LT(d.snr_db, 30.0);
    snrs.insert(d.snr_db);
  }
  EXPECT_EQ(snrs.size(), 100u);
}

TEST(SampleResources, DeterministicAndOrderIndependent) {
  const ResourcePool r = pool(ResourceKind::Rir, 325), n = pool(ResourceKind::Noise, 843);
  const ManifestEntry a{"a", "a.wav", {}, {}}, b{"b", "b.wav", {}, {}};
  ResourceDraw d1 = sample_resources(a, r, n, {0, 30}, {11}, 2);
  (void)sample_resources(b, r, n, {0, 30}, {11}, 2);
  ResourceDraw d2 = sample_resources(a, r, n, {0, 30}, {11}, 2);
  EXPECT_EQ(d1.rir_index, d2.rir_index);
  EXPECT_EQ(d1.noise_index, d2.noise_index);
  EXPECT_EQ(d1.snr_db, d2.snr_db);
  EXPECT_EQ(d1.rng.next_u64(), d2.rng.next_u64());
}

TEST(SampleResources, EpochsGiveFreshDraws) {
  const ResourcePool r = pool(ResourceKind::Rir, 325), n = pool(ResourceKind::Noise, 843);
  const ManifestEntry e{"1089-134686-0000", "x.wav", {}, {}};
  std::set<std::tuple<std::size_t, std::size_t, double>> draws;
  for (std::uint64_t epoch = 0; epoch < 100; ++epoch) {
    const ResourceDraw d = sample_resources(e, r, n, {0, 30}, {0}, epoch);
    draws.emplace(d.rir_index, d.noise_index, d.snr_db);
  }
  EXPECT_EQ(draws.size(), 100u);
}

TEST(SampleResources, RirDrawsAreUniform) {
  const std::size_t k = 325, draws = 100000;
  const ResourcePool r = pool(ResourceKind::Rir, k), n = pool(ResourceKind::Noise, 843);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < draws; ++i)
    ++counts[sample_resources({"utt-" + std::to_string(i), "x", {}, {}}, r, n, {0, 30}, {3}, 0).rir_index];
  const double p = 1.0 / k;
  const double mean = draws * p;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (std::size_t c : counts) ASSERT_LE(std::abs(static_cast<double>(c) - mean), 5 * sigma);
}

TEST(SampleResources, SnrIsUniform) {
  const ResourcePool r = pool(ResourceKind::Rir, 3), n = pool(ResourceKind::Noise, 3);
  const std::size_t draws = 60000;
  std::vector<std::size_t> bins(30, 0);
  for (std::size_t i = 0; i < draws; ++i) {
    const double s = sample_resources({"u" + std::to_string(i), "x", {}, {}}, r, n, {0, 30}, {5}, 1).snr_db;
    ++bins[static_cast<std::size_t>(s)];
  }
  const double mean = draws / 30.0, sigma = std::sqrt(draws * (1.0 / 30) * (29.0 / 30));
  for (std::size_t c : bins) EXPECT_LE(std::abs(static_cast<double>(c) - mean), 5 * sigma);
}

TEST(SampleResources, EmptyPool) {
  const ResourcePool empty = pool(ResourceKind::Rir, 0), n = pool(ResourceKind::Noise, 2);
  EXPECT_EQ(error_of([&] { sample_resources({"a", "x", {}, {}}, empty, n, {0, 30}, {0}, 0); }).code(),
            ErrorCode::EmptyPool);
  EXPECT_EQ(error_of([&] { sample_resources({"a", "x", {}, {}}, n, empty, {0, 30}, {0}, 0); }).code(),
            ErrorCode::EmptyPool);
}
