// pmct/corpus.hpp

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

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pmct/mamp.hpp"
#include "pmct/random.hpp"

namespace pmct {

struct ManifestEntry {
  std::string id;
  std::string audio_path;
  std::optional<std::string> transcript;
  std::optional<double> duration_s;
};

/// JSON-lines manifest, one object per line with "id" and "audio_path" and
/// optionally "transcript" and "duration_s". Blank lines are skipped.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::string& name = "<manifest>") {
  std::vector<ManifestEntry> entries;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  const auto where = [&] { return name + " line " + std::to_string(lineno); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::ParseError, where() + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::ParseError, where() + ": expected a JSON object");
    const auto get_string = [&](const char* key, bool required) -> std::optional<std::string> {
      auto it = j.find(key);
      if (it == j.end() || it->is_null()) {
        if (required) fail(ErrorCode::ParseError, where() + ": missing \"" + key + "\"");
        return std::nullopt;
      }
      if (!it->is_string()) fail(ErrorCode::ParseError, where() + ": \"" + key + "\" must be a string");
      return it->get<std::string>();
    };
    ManifestEntry e;
    e.id = *get_string("id", true);
    e.audio_path = *get_string("audio_path", true);
    e.transcript = get_string("transcript", false);
    if (e.id.empty() || e.audio_path.empty())
      fail(ErrorCode::ParseError, where() + ": id and audio_path must be nonempty");
    if (auto it = j.find("duration_s"); it != j.end() && !it->is_null()) {
      if (!it->is_number()) fail(ErrorCode::ParseError, where() + ": \"duration_s\" must be a number");
      e.duration_s = it->get<double>();
    }
    if (auto [it, inserted] = seen.emplace(e.id, lineno); !inserted)
      fail(ErrorCode::DuplicateId, where() + ": id '" + e.id + "' already used on line " +
                                       std::to_string(it->second));
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::FileNotFound, path.string());
  return parse_manifest(in, path.string());
}

enum class ResourceKind { Rir, Noise };

struct PoolEntry {
  std::string id;
  std::string path;
};

struct ResourcePool {
  ResourceKind kind = ResourceKind::Rir;
  std::vector<PoolEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

/// Pool list: one "id<TAB>path" per line; blank lines and lines starting
/// with '#' are ignored.
inline ResourcePool parse_pool(std::istream& in, ResourceKind kind, const std::string& name = "<pool>") {
  ResourcePool pool;
  pool.kind = kind;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      fail(ErrorCode::ParseError, name + " line " + std::to_string(lineno) + ": expected id<TAB>path");
    PoolEntry e{line.substr(0, tab), line.substr(tab + 1)};
    if (!seen.emplace(e.id, lineno).second)
      fail(ErrorCode::DuplicateId, name + " line " + std::to_string(lineno) + ": id '" + e.id + "'");
    pool.entries.push_back(std::move(e));
  }
  return pool;
}

inline ResourcePool load_pool(const std::filesystem::path& path, ResourceKind kind) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::FileNotFound, path.string());
  return parse_pool(in, kind, path.string());
}

inline std::filesystem::path resolve_path(const std::filesystem::path& root, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || root.empty()) return path;
  return root / path;
}

struct SeedScheme {
  std::uint64_t global_seed = 0;

  std::uint64_t derive(std::string_view utterance_id, std::uint64_t epoch) const {
    return derive_seed(global_seed, utterance_id, epoch);
  }
};

/// Per-utterance augmentation resources plus the generator, positioned
/// after the draws made here, for everything downstream.
struct ResourceDraw {
  std::size_t rir_index = 0;
  std::size_t noise_index = 0;
  double snr_db = 0.0;
  Rng rng{0};
};

/// Draw order on the derived generator: RIR index, noise index, SNR.
inline ResourceDraw sample_resources(const ManifestEntry& entry, const ResourcePool& rirs,
                                     const ResourcePool& noises, const SnrRange& snr_range,
                                     const SeedScheme& seed, std::uint64_t epoch) {
  if (rirs.empty()) fail(ErrorCode::EmptyPool, "RIR pool is empty");
  if (noises.empty()) fail(ErrorCode::EmptyPool, "noise pool is empty");
  validate(snr_range);
  ResourceDraw d{0, 0, 0.0, Rng(seed.derive(entry.id, epoch))};
  d.rir_index = static_cast<std::size_t>(d.rng.below(rirs.size()));
  d.noise_index = static_cast<std::size_t>(d.rng.below(noises.size()));
  d.snr_db = d.rng.uniform(snr_range.lo_db, snr_range.hi_db);
  return d;
}

}  // namespace pmct
