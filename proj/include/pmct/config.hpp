// pmct/config.hpp

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

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmct/mamp.hpp"
#include "pmct/mel.hpp"
#include "pmct/specaugment.hpp"
#include "pmct/wav.hpp"

namespace pmct {

enum class Mode { Clean, Mct, Pmct };
enum class OutputKind { Wav, Features, Both };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Clean: return "clean";
    case Mode::Mct: return "mct";
    case Mode::Pmct: return "pmct";
  }
  return "?";
}

/// Everything one augmentation run depends on. Defaults: pMCT with pi = 0.5,
/// 1 s patches, MCT probabilities 0.5, SNR ~ U(0, 30) dB, SpecAugment off.
struct RunConfig {
  Mode mode = Mode::Pmct;
  MampConfig mamp;
  MctConfig mct;
  /// Empty means SpecAugment is off.
  std::optional<PolicyLevel> specaugment;
  SpecAugmentPolicy specaugment_base;
  MelConfig mel;

  std::filesystem::path manifest;
  std::filesystem::path rir_list;
  std::filesystem::path noise_list;
  std::filesystem::path root;
  std::filesystem::path out;

  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  OutputKind output_kind = OutputKind::Wav;
  WavEncoding wav_encoding = WavEncoding::Float32;
  unsigned workers = 1;
  bool fail_fast = false;
};

namespace detail {

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  if constexpr (std::is_floating_point_v<T>) {
    // std::from_chars for double is not in every libstdc++ we target.
    std::string s(value);
    std::size_t used = 0;
    try {
      out = static_cast<T>(std::stod(s, &used));
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != s.size() || s.empty())
      fail(ErrorCode::ConfigError, std::string(key) + ": expected a number, got '" + s + "'");
  } else {
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
      fail(ErrorCode::ConfigError, std::string(key) + ": expected an integer, got '" + std::string(value) + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  fail(ErrorCode::ConfigError, std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// Applies one setting. Keys are the long flag names with '-' or '_'.
inline void apply_setting(RunConfig& cfg, std::string key, const std::string& value) {
  using detail::parse_number;
  for (char& c : key)
    if (c == '-') c = '_';
  const auto bad = [&](const char* expected) {
    fail(ErrorCode::ConfigError, key + ": expected " + expected + ", got '" + value + "'");
  };

  if (key == "mode") {
    if (value == "clean") cfg.mode = Mode::Clean;
    else if (value == "mct") cfg.mode = Mode::Mct;
    else if (value == "pmct") cfg.mode = Mode::Pmct;
    else bad("clean|mct|pmct");
  } else if (key == "pi") {
    if (value == "rand") {
      cfg.mamp.pi_random = true;
    } else {
      cfg.mamp.pi_random = false;
      cfg.mamp.pi_clean = parse_number<double>(key, value);
    }
  } else if (key == "patch_len") {
    cfg.mamp.patch_len_s = parse_number<double>(key, value);
  } else if (key == "p_reverb") {
    cfg.mct.p_reverb = parse_number<double>(key, value);
  } else if (key == "p_noise") {
    cfg.mct.p_noise = parse_number<double>(key, value);
  } else if (key == "snr_lo") {
    cfg.mamp.snr_range.lo_db = cfg.mct.snr_range.lo_db = parse_number<double>(key, value);
  } else if (key == "snr_hi") {
    cfg.mamp.snr_range.hi_db = cfg.mct.snr_range.hi_db = parse_number<double>(key, value);
  } else if (key == "specaugment") {
    if (value == "off") cfg.specaugment.reset();
    else if (value == "high" || value == "mid" || value == "low") cfg.specaugment = parse_policy_level(value);
    else bad("off|high|mid|low");
  } else if (key == "sa_n_freq_masks") {
    cfg.specaugment_base.n_freq_masks = parse_number<std::uint32_t>(key, value);
  } else if (key == "sa_freq_mask_max") {
    cfg.specaugment_base.freq_mask_max = parse_number<std::uint32_t>(key, value);
  } else if (key == "sa_time_mask_ratio") {
    cfg.specaugment_base.time_mask_ratio = parse_number<double>(key, value);
  } else if (key == "sa_time_mask_max_ratio") {
    cfg.specaugment_base.time_mask_max_ratio = parse_number<double>(key, value);
  } else if (key == "sa_mask_value") {
    if (value == "zero") cfg.specaugment_base.mask_value = MaskValue::Zero;
    else if (value == "mean") cfg.specaugment_base.mask_value = MaskValue::UtteranceMean;
    else bad("zero|mean");
  } else if (key == "mel_bins") {
    cfg.mel.num_bins = parse_number<std::uint32_t>(key, value);
  } else if (key == "frame_length_ms") {
    cfg.mel.frame_length_ms = parse_number<std::uint32_t>(key, value);
  } else if (key == "frame_shift_ms") {
    cfg.mel.frame_shift_ms = parse_number<std::uint32_t>(key, value);
  } else if (key == "manifest") {
    cfg.manifest = value;
  } else if (key == "rir_list") {
    cfg.rir_list = value;
  } else if (key == "noise_list") {
    cfg.noise_list = value;
  } else if (key == "root") {
    cfg.root = value;
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "epoch") {
    cfg.epoch = parse_number<std::uint64_t>(key, value);
  } else if (key == "output_kind") {
    if (value == "wav") cfg.output_kind = OutputKind::Wav;
    else if (value == "features") cfg.output_kind = OutputKind::Features;
    else if (value == "both") cfg.output_kind = OutputKind::Both;
    else bad("wav|features|both");
  } else if (key == "wav_encoding") {
    if (value == "float32") cfg.wav_encoding = WavEncoding::Float32;
    else if (value == "pcm16") cfg.wav_encoding = WavEncoding::Pcm16;
    else bad("float32|pcm16");
  } else if (key == "workers") {
    cfg.workers = parse_number<unsigned>(key, value);
  } else if (key == "fail_fast") {
    cfg.fail_fast = detail::parse_bool(key, value);
  } else {
    fail(ErrorCode::ConfigError, "unknown setting '" + key + "'");
  }
}

/// Flat "key = value" lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_settings(std::istream& in,
                                                                       const std::string& name = "<config>") {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ConfigError, name + " line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(std::string_view(t).substr(0, eq));
    std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) fail(ErrorCode::ConfigError, name + " line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read config file " + path.string());
  for (auto& [k, v] : parse_settings(in, path.string())) apply_setting(cfg, k, v);
}

inline void validate(const RunConfig& cfg, bool needs_output_dir = true) {
  namespace fs = std::filesystem;
  const auto wrap = [](auto&& check) {
    try {
      check();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      throw Error(ErrorCode::ConfigError, e.what());
    }
  };
  wrap([&] { validate(cfg.mamp); });
  wrap([&] { validate(cfg.mct); });
  wrap([&] { validate(cfg.specaugment_base); });
  if (cfg.mel.num_bins == 0 || cfg.mel.frame_length_ms == 0 || cfg.mel.frame_shift_ms == 0)
    fail(ErrorCode::ConfigError, "mel settings must be positive");
  if (cfg.workers == 0) fail(ErrorCode::ConfigError, "workers must be at least 1");

  const auto require_file = [](const fs::path& p, const char* what) {
    if (p.empty()) fail(ErrorCode::ConfigError, std::string("--") + what + " is required");
    if (!fs::is_regular_file(p)) fail(ErrorCode::ConfigError, std::string(what) + " not found: " + p.string());
  };
  require_file(cfg.manifest, "manifest");
  if (cfg.mode != Mode::Clean) {
    require_file(cfg.rir_list, "rir-list");
    require_file(cfg.noise_list, "noise-list");
  }
  if (!cfg.root.empty() && !fs::is_directory(cfg.root))
    fail(ErrorCode::ConfigError, "root is not a directory: " + cfg.root.string());
  if (needs_output_dir && cfg.out.empty()) fail(ErrorCode::ConfigError, "--out is required");
}

}  // namespace pmct
