// pmct/audio.hpp

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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pmct/error.hpp"

namespace pmct {

/// Operating rate of every corpus file the toolkit touches.
inline constexpr int kSampleRate = 16000;

/// Mono waveform, amplitudes normalized so that full scale is [-1, 1].
/// Used for clean speech, reverberated speech, noise and the mixed output.
struct AudioBuffer {
  std::string id;
  int sample_rate = kSampleRate;
  std::vector<double> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
};

/// Time-major T x F matrix of real features.
struct FeatureMatrix {
  std::string id;
  std::uint32_t num_frames = 0;
  std::uint32_t num_bins = 0;
  std::uint32_t frame_shift_ms = 10;
  std::uint32_t frame_length_ms = 25;
  std::vector<float> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::uint32_t frames, std::uint32_t bins, float fill = 0.0f)
      : num_frames(frames), num_bins(bins),
        data(static_cast<std::size_t>(frames) * bins, fill) {}

  float& at(std::size_t t, std::size_t f) { return data[t * num_bins + f]; }
  float at(std::size_t t, std::size_t f) const { return data[t * num_bins + f]; }
  std::span<float> row(std::size_t t) {
    return {data.data() + t * num_bins, num_bins};
  }
  std::span<const float> row(std::size_t t) const {
    return {data.data() + t * num_bins, num_bins};
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

inline bool all_finite(std::span<const double> xs) {
  for (double v : xs)
    if (!std::isfinite(v)) return false;
  return true;
}

inline bool all_finite(std::span<const float> xs) {
  for (float v : xs)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Mean squared amplitude.
inline double mean_power(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double v : xs) acc += v * v;
  return acc / static_cast<double>(xs.size());
}

/// Throws unless the buffer can enter the augmentation pipeline.
inline void require_valid(const AudioBuffer& buf, std::string_view what) {
  if (buf.empty())
    fail(ErrorCode::EmptyInput, std::string(what) + " '" + buf.id + "' is empty");
  if (buf.sample_rate <= 0)
    fail(ErrorCode::InvalidArgument,
         std::string(what) + " '" + buf.id + "' has a non-positive sample rate");
  if (!all_finite(buf.samples))
    fail(ErrorCode::NonFinite,
         std::string(what) + " '" + buf.id + "' contains NaN or Inf");
}

}  // namespace pmct
