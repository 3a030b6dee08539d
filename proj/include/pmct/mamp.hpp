// pmct/mamp.hpp

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
#include <string>
#include <vector>

#include "pmct/audio.hpp"
#include "pmct/dsp.hpp"
#include "pmct/random.hpp"

namespace pmct {

struct SnrRange {
  double lo_db = 0.0;
  double hi_db = 30.0;
};

inline void validate(const SnrRange& r) {
  if (!std::isfinite(r.lo_db) || !std::isfinite(r.hi_db) || r.lo_db > r.hi_db)
    fail(ErrorCode::InvalidArgument, "SNR range must be finite with lo <= hi");
}

/// Patch mixing hyperparameters.
struct MampConfig {
  /// Probability that a patch is taken from the clean signal.
  double pi_clean = 0.5;
  /// Draw pi ~ U(0, 1) once per utterance instead of using pi_clean.
  bool pi_random = false;
  double patch_len_s = 1.0;
  SnrRange snr_range;
};

struct MctConfig {
  double p_reverb = 0.5;
  double p_noise = 0.5;
  SnrRange snr_range;
};

inline void validate(const MampConfig& cfg) {
  if (!cfg.pi_random && !(cfg.pi_clean >= 0.0 && cfg.pi_clean <= 1.0))
    fail(ErrorCode::InvalidArgument, "pi must lie in [0, 1]");
  if (!(cfg.patch_len_s > 0.0) || !std::isfinite(cfg.patch_len_s))
    fail(ErrorCode::InvalidArgument, "patch length must be positive");
  validate(cfg.snr_range);
}

inline void validate(const MctConfig& cfg) {
  if (!(cfg.p_reverb >= 0.0 && cfg.p_reverb <= 1.0) || !(cfg.p_noise >= 0.0 && cfg.p_noise <= 1.0))
    fail(ErrorCode::InvalidArgument, "MCT probabilities must lie in [0, 1]");
  validate(cfg.snr_range);
}

/// round(patch_len_s * sample_rate), at least one sample.
inline std::size_t patch_len_samples(const MampConfig& cfg, int sample_rate) {
  validate(cfg);
  const auto n = std::llround(cfg.patch_len_s * sample_rate);
  if (n < 1) fail(ErrorCode::InvalidArgument, "patch length rounds to zero samples");
  return static_cast<std::size_t>(n);
}

enum class PatchSource : std::uint8_t { Unassigned, Clean, Distorted };

inline char to_char(PatchSource s) {
  switch (s) {
    case PatchSource::Clean: return 'C';
    case PatchSource::Distorted: return 'D';
    case PatchSource::Unassigned: break;
  }
  return '?';
}

struct Patch {
  std::size_t start = 0;
  std::size_t length = 0;
  PatchSource source = PatchSource::Unassigned;

  friend bool operator==(const Patch&, const Patch&) = default;
};

/// Contiguous, in-order partition of [0, L). Every patch but the last has
/// the same length; the last is no longer than the first.
struct PatchPlan {
  std::vector<Patch> patches;

  std::size_t total_length() const {
    return patches.empty() ? 0 : patches.back().start + patches.back().length;
  }

  friend bool operator==(const PatchPlan&, const PatchPlan&) = default;
};

inline PatchPlan extract_patch_plan(std::size_t length, std::size_t patch_len) {
  if (length == 0 || patch_len == 0)
    fail(ErrorCode::InvalidArgument, "patch plan needs positive signal and patch lengths");
  const std::size_t count = (length + patch_len - 1) / patch_len;
  PatchPlan plan;
  plan.patches.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    const std::size_t start = p * patch_len;
    plan.patches.push_back({start, std::min(patch_len, length - start), PatchSource::Unassigned});
  }
  return plan;
}

/// Labels each patch in order: Clean iff u_p < pi with u_p = rng.uniform01().
/// One draw per patch regardless of pi, so for a fixed stream raising pi can
/// only flip Distorted labels to Clean.
inline PatchPlan assign_sources(PatchPlan plan, double pi, Rng& rng) {
  if (!(pi >= 0.0 && pi <= 1.0)) fail(ErrorCode::InvalidArgument, "pi must lie in [0, 1]");
  for (Patch& p : plan.patches)
    p.source = rng.uniform01() < pi ? PatchSource::Clean : PatchSource::Distorted;
  return plan;
}

/// z(n): x(n) inside Clean patches, y(n) inside Distorted ones. No cross-fade.
inline AudioBuffer splice_patches(const AudioBuffer& clean, const AudioBuffer& distorted,
                                  const PatchPlan& plan) {
  if (clean.size() != distorted.size() || plan.total_length() != clean.size())
    fail(ErrorCode::InconsistentShape, "patch plan does not cover both signals");
  AudioBuffer z = clean;
  for (const Patch& p : plan.patches) {
    if (p.source == PatchSource::Unassigned)
      fail(ErrorCode::InvalidArgument, "patch plan has unassigned sources");
    if (p.source == PatchSource::Distorted)
      std::copy_n(distorted.samples.begin() + static_cast<std::ptrdiff_t>(p.start), p.length,
                  z.samples.begin() + static_cast<std::ptrdiff_t>(p.start));
  }
  return z;
}

struct PmctResult {
  AudioBuffer z;
  /// Reverberated, noise-added signal the distorted patches came from.
  AudioBuffer y;
  PatchPlan plan;
  double pi_effective = 0.0;
  double snr_db = 0.0;
  double noise_gain = 0.0;
  std::size_t noise_offset = 0;
  bool silent_signal = false;
};

/// pMCT with the SNR already chosen. Draw order: noise offset (only when
/// the noise is longer than x), pi (rand mode only), one draw per patch.
inline PmctResult augment_pmct_at_snr(const AudioBuffer& x, const ImpulseResponse& h,
                                      const AudioBuffer& noise, double snr_db,
                                      const MampConfig& cfg, Rng& rng) {
  validate(cfg);
  require_valid(x, "signal");
  PmctResult r;
  r.snr_db = snr_db;
  NoiseMix mix = mix_noise_at_snr(apply_rir(x, h), noise, snr_db, rng);
  r.y = std::move(mix.mixed);
  r.noise_gain = mix.gain;
  r.noise_offset = mix.noise_offset;
  r.silent_signal = mix.silent_signal;

  r.pi_effective = cfg.pi_random ? rng.uniform01() : cfg.pi_clean;
  r.plan = assign_sources(extract_patch_plan(x.size(), patch_len_samples(cfg, x.sample_rate)),
                          r.pi_effective, rng);
  r.z = splice_patches(x, r.y, r.plan);
  return r;
}

/// pMCT: distort x into y (reverb then noise), then mix clean and distorted
/// patches. The SNR is the first draw, followed by augment_pmct_at_snr's.
inline PmctResult augment_pmct(const AudioBuffer& x, const ImpulseResponse& h,
                               const AudioBuffer& noise, const MampConfig& cfg, Rng& rng) {
  validate(cfg);
  const double snr_db = rng.uniform(cfg.snr_range.lo_db, cfg.snr_range.hi_db);
  return augment_pmct_at_snr(x, h, noise, snr_db, cfg, rng);
}

struct MctResult {
  AudioBuffer out;
  bool reverb_applied = false;
  bool noise_applied = false;
  double snr_db = 0.0;
  double noise_gain = 0.0;
  std::size_t noise_offset = 0;
  bool silent_signal = false;
};

namespace detail {

template <class SnrSource>
MctResult augment_mct_impl(const AudioBuffer& x, const ImpulseResponse& h,
                           const AudioBuffer& noise, const MctConfig& cfg, Rng& rng,
                           SnrSource&& next_snr) {
  validate(cfg);
  require_valid(x, "signal");
  MctResult r;
  r.reverb_applied = rng.bernoulli(cfg.p_reverb);
  r.noise_applied = rng.bernoulli(cfg.p_noise);
  r.out = r.reverb_applied ? apply_rir(x, h) : x;
  if (r.noise_applied) {
    r.snr_db = next_snr();
    NoiseMix mix = mix_noise_at_snr(r.out, noise, r.snr_db, rng);
    r.out = std::move(mix.mixed);
    r.noise_gain = mix.gain;
    r.noise_offset = mix.noise_offset;
    r.silent_signal = mix.silent_signal;
  }
  return r;
}

}  // namespace detail

/// Plain MCT. Draw order: reverb decision, noise decision, then, only when
/// noise is added, the SNR and the noise offset. Decisions with probability
/// exactly 0 or 1 consume no draw.
inline MctResult augment_mct(const AudioBuffer& x, const ImpulseResponse& h,
                             const AudioBuffer& noise, const MctConfig& cfg, Rng& rng) {
  return detail::augment_mct_impl(x, h, noise, cfg, rng, [&] {
    return rng.uniform(cfg.snr_range.lo_db, cfg.snr_range.hi_db);
  });
}

/// MCT with the SNR already chosen; the stream sees only the decisions and
/// the noise offset.
inline MctResult augment_mct_at_snr(const AudioBuffer& x, const ImpulseResponse& h,
                                    const AudioBuffer& noise, double snr_db,
                                    const MctConfig& cfg, Rng& rng) {
  return detail::augment_mct_impl(x, h, noise, cfg, rng, [snr_db] { return snr_db; });
}

}  // namespace pmct
