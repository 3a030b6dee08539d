// pmct/dsp.hpp

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
#include <span>
#include <string>
#include <vector>

#include "pmct/audio.hpp"
#include "pmct/fft.hpp"
#include "pmct/random.hpp"

namespace pmct {

/// Room impulse response with its direct-path index cached at construction.
class ImpulseResponse {
 public:
  ImpulseResponse() = default;

  /// Throws EmptyImpulse for no taps or all-zero taps, NonFinite for NaN/Inf.
  explicit ImpulseResponse(std::vector<double> taps, std::string id = {});

  const std::string& id() const noexcept { return id_; }
  std::span<const double> taps() const noexcept { return taps_; }
  std::size_t size() const noexcept { return taps_.size(); }
  std::size_t direct_path_index() const noexcept { return direct_path_; }

 private:
  std::string id_;
  std::vector<double> taps_;
  std::size_t direct_path_ = 0;
};

/// Index of the largest |h(m)|; ties go to the smallest index.
inline std::size_t direct_path_delay(std::span<const double> taps) {
  if (taps.empty()) fail(ErrorCode::EmptyImpulse, "impulse response has no taps");
  std::size_t best = 0;
  double best_mag = std::abs(taps[0]);
  for (std::size_t m = 1; m < taps.size(); ++m) {
    const double mag = std::abs(taps[m]);
    if (mag > best_mag) {
      best = m;
      best_mag = mag;
    }
  }
  return best;
}

inline std::size_t direct_path_delay(const ImpulseResponse& h) { return h.direct_path_index(); }

inline ImpulseResponse::ImpulseResponse(std::vector<double> taps, std::string id)
    : id_(std::move(id)), taps_(std::move(taps)) {
  if (!all_finite(taps_)) fail(ErrorCode::NonFinite, "impulse response '" + id_ + "'");
  direct_path_ = direct_path_delay(taps_);
  if (taps_[direct_path_] == 0.0)
    fail(ErrorCode::EmptyImpulse, "impulse response '" + id_ + "' is all zeros");
}

/// Kernels at or below this many taps are convolved in the time domain.
inline constexpr std::size_t kDirectConvolutionMaxTaps = 128;

/// Full linear convolution, length N + M - 1, O(N*M).
inline std::vector<double> convolve_direct(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) fail(ErrorCode::EmptyInput, "convolution of an empty sequence");
  std::vector<double> out(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    double* dst = out.data() + i;
    for (std::size_t m = 0; m < h.size(); ++m) dst[m] += xi * h[m];
  }
  return out;
}

/// Full linear convolution by FFT overlap-add, length N + M - 1.
inline std::vector<double> convolve_fft(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) fail(ErrorCode::EmptyInput, "convolution of an empty sequence");
  const std::size_t n = x.size();
  const std::size_t m = h.size();
  const std::size_t full = n + m - 1;

  // Blocks of roughly 3M input samples; a single transform when the whole
  // result fits in one.
  std::size_t nfft = 4 * next_pow2(m);
  if (next_pow2(full) <= nfft) nfft = next_pow2(full);
  const std::size_t block = nfft - m + 1;
  const std::size_t bins = nfft / 2 + 1;
  const double scale = 1.0 / static_cast<double>(nfft);

  RealFft fft(nfft);
  std::fill_n(fft.time(), nfft, 0.0);
  std::copy(h.begin(), h.end(), fft.time());
  fft.forward();
  std::vector<std::complex<double>> kernel(fft.freq(), fft.freq() + bins);

  std::vector<double> out(full, 0.0);
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t len = std::min(block, n - start);
    std::fill_n(fft.time(), nfft, 0.0);
    std::copy_n(x.begin() + start, len, fft.time());
    fft.forward();
    std::complex<double>* spec = fft.freq();
    for (std::size_t k = 0; k < bins; ++k) spec[k] *= kernel[k];
    fft.inverse();
    const std::size_t produced = std::min(len + m - 1, full - start);
    const double* t = fft.time();
    for (std::size_t i = 0; i < produced; ++i) out[start + i] += t[i] * scale;
  }
  return out;
}

inline std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  return h.size() <= kDirectConvolutionMaxTaps ? convolve_direct(x, h) : convolve_fft(x, h);
}

/// Reverberates x with h and removes the direct-path delay, so sample n of
/// the result lines up with sample n of x. Output length equals input length.
inline AudioBuffer apply_rir(const AudioBuffer& x, const ImpulseResponse& h) {
  require_valid(x, "signal");
  if (h.size() == 0) fail(ErrorCode::EmptyImpulse, "impulse response has no taps");
  const std::vector<double> full = convolve(x.samples, h.taps());
  const std::size_t d = h.direct_path_index();
  AudioBuffer y;
  y.id = x.id;
  y.sample_rate = x.sample_rate;
  y.samples.assign(full.begin() + static_cast<std::ptrdiff_t>(d),
                   full.begin() + static_cast<std::ptrdiff_t>(d + x.size()));
  return y;
}

/// Noise cropped or tiled to `length` samples starting at `offset`:
/// segment[i] = noise[(offset + i) mod N].
inline std::vector<double> noise_segment(std::span<const double> noise, std::size_t length,
                                         std::size_t offset) {
  if (noise.empty()) fail(ErrorCode::EmptyInput, "noise is empty");
  std::vector<double> seg(length);
  std::size_t j = offset % noise.size();
  for (std::size_t i = 0; i < length; ++i) {
    seg[i] = noise[j];
    if (++j == noise.size()) j = 0;
  }
  return seg;
}

/// Gain that puts g*noise at `snr_db` below a signal of power `signal_power`.
inline double snr_gain(double signal_power, double noise_power, double snr_db) {
  return std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
}

/// 10*log10(P_signal / P_noise).
inline double measured_snr_db(std::span<const double> signal, std::span<const double> noise) {
  return 10.0 * std::log10(mean_power(signal) / mean_power(noise));
}

struct NoiseMix {
  AudioBuffer mixed;
  double gain = 0.0;
  std::size_t noise_offset = 0;
  /// The signal had zero power; it was returned without noise.
  bool silent_signal = false;
};

/// Adds noise to y at the requested SNR, measured against the power of y
/// over the whole utterance. Noise longer than y is cropped at an offset
/// drawn from `rng` (one below() draw); shorter noise is tiled from its
/// first sample and consumes no draw.
inline NoiseMix mix_noise_at_snr(const AudioBuffer& y, const AudioBuffer& noise, double snr_db,
                                 Rng& rng) {
  require_valid(y, "signal");
  require_valid(noise, "noise");
  if (!std::isfinite(snr_db)) fail(ErrorCode::InvalidArgument, "SNR must be finite");
  if (mean_power(noise.samples) == 0.0)
    fail(ErrorCode::SilentNoise, "noise '" + noise.id + "' has zero power");

  NoiseMix result;
  const std::size_t length = y.size();
  if (noise.size() > length) result.noise_offset = rng.below(noise.size() - length + 1);

  const std::vector<double> seg = noise_segment(noise.samples, length, result.noise_offset);
  const double noise_power = mean_power(seg);
  if (noise_power == 0.0)
    fail(ErrorCode::SilentNoise, "selected segment of noise '" + noise.id + "' is silent");

  result.mixed = y;
  const double signal_power = mean_power(y.samples);
  if (signal_power == 0.0) {
    result.silent_signal = true;
    return result;
  }
  result.gain = snr_gain(signal_power, noise_power, snr_db);
  for (std::size_t i = 0; i < length; ++i) result.mixed.samples[i] += result.gain * seg[i];
  return result;
}

}  // namespace pmct
