// pmct/specaugment.hpp

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pmct/audio.hpp"
#include "pmct/random.hpp"

namespace pmct {

enum class MaskValue { Zero, UtteranceMean };

enum class PolicyLevel { High, Mid, Low };

/// Adaptive SpecAugment masking parameters. The number of time masks scales
/// with utterance length: floor(time_mask_ratio * T), each at most
/// floor(time_mask_max_ratio * T) frames wide.
struct SpecAugmentPolicy {
  std::uint32_t n_freq_masks = 2;
  std::uint32_t freq_mask_max = 27;
  double time_mask_ratio = 0.04;
  double time_mask_max_ratio = 0.05;
  MaskValue mask_value = MaskValue::Zero;

  friend bool operator==(const SpecAugmentPolicy&, const SpecAugmentPolicy&) = default;
};

inline void validate(const SpecAugmentPolicy& p) {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.time_mask_ratio) || !in_unit(p.time_mask_max_ratio))
    fail(ErrorCode::InvalidArgument, "SpecAugment ratios must lie in [0, 1]");
}

inline PolicyLevel parse_policy_level(std::string_view s) {
  if (s == "high") return PolicyLevel::High;
  if (s == "mid") return PolicyLevel::Mid;
  if (s == "low") return PolicyLevel::Low;
  fail(ErrorCode::InvalidArgument, "unknown SpecAugment level '" + std::string(s) + "'");
}

/// High is the base policy; Mid and Low divide every masking parameter by 2
/// and 4 (integers floor-divided, ratios divided exactly).
inline SpecAugmentPolicy derive_policy(const SpecAugmentPolicy& base, PolicyLevel level) {
  validate(base);
  const std::uint32_t div = level == PolicyLevel::High ? 1 : level == PolicyLevel::Mid ? 2 : 4;
  SpecAugmentPolicy p = base;
  p.n_freq_masks = base.n_freq_masks / div;
  p.freq_mask_max = base.freq_mask_max / div;
  p.time_mask_ratio = base.time_mask_ratio / div;
  p.time_mask_max_ratio = base.time_mask_max_ratio / div;
  return p;
}

enum class MaskAxis { Frequency, Time };

/// Half-open band [start, start + width) along one axis.
struct MaskBand {
  MaskAxis axis = MaskAxis::Frequency;
  std::size_t start = 0;
  std::size_t width = 0;

  friend bool operator==(const MaskBand&, const MaskBand&) = default;
};

inline std::size_t adaptive_time_mask_count(const SpecAugmentPolicy& p, std::size_t num_frames) {
  return static_cast<std::size_t>(std::floor(p.time_mask_ratio * static_cast<double>(num_frames)));
}

inline std::size_t adaptive_time_mask_max(const SpecAugmentPolicy& p, std::size_t num_frames) {
  const auto w = static_cast<std::size_t>(std::floor(p.time_mask_max_ratio * static_cast<double>(num_frames)));
  return std::min(w, num_frames);
}

/// Draw order: for each frequency mask, width ~ U{0..min(freq_mask_max, F)}
/// then start ~ U{0..F - width}; then the same for each time mask with the
/// adaptive count and width bound.
inline std::vector<MaskBand> draw_masks(const SpecAugmentPolicy& policy, std::size_t num_frames,
                                        std::size_t num_bins, Rng& rng) {
  validate(policy);
  std::vector<MaskBand> bands;
  const auto draw = [&](MaskAxis axis, std::size_t max_width, std::size_t extent) {
    const auto width = static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(max_width)));
    const auto start =
        static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(extent - width)));
    bands.push_back({axis, start, width});
  };
  const std::size_t freq_max = std::min<std::size_t>(policy.freq_mask_max, num_bins);
  for (std::uint32_t i = 0; i < policy.n_freq_masks; ++i)
    draw(MaskAxis::Frequency, freq_max, num_bins);
  const std::size_t time_count = adaptive_time_mask_count(policy, num_frames);
  const std::size_t time_max = adaptive_time_mask_max(policy, num_frames);
  for (std::size_t i = 0; i < time_count; ++i) draw(MaskAxis::Time, time_max, num_frames);
  return bands;
}

inline FeatureMatrix apply_masks(FeatureMatrix m, std::span<const MaskBand> bands, MaskValue value) {
  if (bands.empty()) return m;
  float fill = 0.0f;
  if (value == MaskValue::UtteranceMean && !m.data.empty()) {
    double acc = 0.0;
    for (float v : m.data) acc += v;
    fill = static_cast<float>(acc / static_cast<double>(m.data.size()));
  }
  for (const MaskBand& b : bands) {
    if (b.axis == MaskAxis::Frequency) {
      if (b.start + b.width > m.num_bins) fail(ErrorCode::InvalidArgument, "frequency mask out of range");
      for (std::size_t t = 0; t < m.num_frames; ++t)
        std::fill_n(m.row(t).begin() + static_cast<std::ptrdiff_t>(b.start), b.width, fill);
    } else {
      if (b.start + b.width > m.num_frames) fail(ErrorCode::InvalidArgument, "time mask out of range");
      for (std::size_t t = b.start; t < b.start + b.width; ++t)
        std::fill(m.row(t).begin(), m.row(t).end(), fill);
    }
  }
  return m;
}

/// Number of distinct cells covered by the bands.
inline std::size_t masked_cell_count(std::span<const MaskBand> bands, std::size_t num_frames,
                                     std::size_t num_bins) {
  std::vector<bool> time(num_frames, false), freq(num_bins, false);
  for (const MaskBand& b : bands) {
    auto& axis = b.axis == MaskAxis::Time ? time : freq;
    std::fill_n(axis.begin() + static_cast<std::ptrdiff_t>(b.start), b.width, true);
  }
  const auto nt = static_cast<std::size_t>(std::count(time.begin(), time.end(), true));
  const auto nf = static_cast<std::size_t>(std::count(freq.begin(), freq.end(), true));
  return nt * num_bins + nf * num_frames - nt * nf;
}

inline FeatureMatrix apply_specaugment(const FeatureMatrix& m, const SpecAugmentPolicy& policy,
                                       Rng& rng) {
  const std::vector<MaskBand> bands = draw_masks(policy, m.num_frames, m.num_bins, rng);
  return apply_masks(m, bands, policy.mask_value);
}

}  // namespace pmct
