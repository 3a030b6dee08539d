// pmct/mel.hpp

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
#include <numbers>
#include <vector>

#include "pmct/audio.hpp"
#include "pmct/fft.hpp"

namespace pmct {

struct MelConfig {
  std::uint32_t frame_length_ms = 25;
  std::uint32_t frame_shift_ms = 10;
  std::uint32_t num_bins = 80;
  double low_hz = 0.0;
  /// 0 means the Nyquist frequency.
  double high_hz = 0.0;
};

/// Floor applied before the logarithm.
inline constexpr double kLogFloor = 1e-10;

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

inline std::size_t ms_to_samples(std::uint32_t ms, int sample_rate) {
  return static_cast<std::size_t>(std::lround(ms * static_cast<double>(sample_rate) / 1000.0));
}

/// Triangular filters equally spaced on the HTK mel scale, evaluated at FFT
/// bin frequencies in the mel domain. Row-major: num_bins x (fft_size/2 + 1).
class MelFilterBank {
 public:
  MelFilterBank(const MelConfig& cfg, int sample_rate, std::size_t fft_size)
      : num_bins_(cfg.num_bins), num_fft_bins_(fft_size / 2 + 1) {
    if (cfg.num_bins == 0) fail(ErrorCode::InvalidArgument, "mel bank needs at least one bin");
    const double nyquist = sample_rate / 2.0;
    const double high = cfg.high_hz > 0.0 ? cfg.high_hz : nyquist;
    if (cfg.low_hz < 0.0 || high <= cfg.low_hz || high > nyquist)
      fail(ErrorCode::InvalidArgument, "mel frequency range is invalid");
    const double mel_lo = hz_to_mel(cfg.low_hz);
    const double mel_step = (hz_to_mel(high) - mel_lo) / (num_bins_ + 1);

    centers_hz_.resize(num_bins_);
    weights_.assign(num_bins_ * num_fft_bins_, 0.0);
    for (std::size_t b = 0; b < num_bins_; ++b) {
      const double left = mel_lo + b * mel_step;
      const double center = left + mel_step;
      const double right = center + mel_step;
      centers_hz_[b] = mel_to_hz(center);
      for (std::size_t k = 0; k < num_fft_bins_; ++k) {
        const double mel = hz_to_mel(k * static_cast<double>(sample_rate) / fft_size);
        double w = 0.0;
        if (mel > left && mel <= center)
          w = (mel - left) / (center - left);
        else if (mel > center && mel < right)
          w = (right - mel) / (right - center);
        weights_[b * num_fft_bins_ + k] = w;
      }
    }
  }

  std::size_t num_bins() const noexcept { return num_bins_; }
  const std::vector<double>& centers_hz() const noexcept { return centers_hz_; }

  double apply(std::size_t bin, const double* magnitude) const {
    const double* w = weights_.data() + bin * num_fft_bins_;
    double acc = 0.0;
    for (std::size_t k = 0; k < num_fft_bins_; ++k) acc += w[k] * magnitude[k];
    return acc;
  }

 private:
  std::size_t num_bins_;
  std::size_t num_fft_bins_;
  std::vector<double> centers_hz_;
  std::vector<double> weights_;
};

/// Symmetric Hann window of length n.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

/// Log-mel energies: Hann window, magnitude spectrum (FFT size is the frame
/// length rounded up to a power of two), mel filterbank, natural log with
/// floor 1e-10. T = 1 + floor((L - frame_len) / hop).
inline FeatureMatrix log_mel_features(const AudioBuffer& x, const MelConfig& cfg = {}) {
  require_valid(x, "signal");
  const std::size_t frame_len = ms_to_samples(cfg.frame_length_ms, x.sample_rate);
  const std::size_t hop = ms_to_samples(cfg.frame_shift_ms, x.sample_rate);
  if (frame_len == 0 || hop == 0)
    fail(ErrorCode::InvalidArgument, "frame length and shift must be positive");
  if (x.size() < frame_len)
    fail(ErrorCode::TooShort, "signal '" + x.id + "' has " + std::to_string(x.size()) +
                                  " samples, fewer than one frame (" +
                                  std::to_string(frame_len) + ")");

  const std::size_t num_frames = 1 + (x.size() - frame_len) / hop;
  const std::size_t nfft = next_pow2(frame_len);
  const MelFilterBank bank(cfg, x.sample_rate, nfft);
  const std::vector<double> window = hann_window(frame_len);

  FeatureMatrix out(static_cast<std::uint32_t>(num_frames), cfg.num_bins);
  out.id = x.id;
  out.frame_length_ms = cfg.frame_length_ms;
  out.frame_shift_ms = cfg.frame_shift_ms;

  RealFft fft(nfft);
  std::vector<double> magnitude(fft.num_bins());
  for (std::size_t t = 0; t < num_frames; ++t) {
    double* buf = fft.time();
    const double* frame = x.samples.data() + t * hop;
    for (std::size_t i = 0; i < frame_len; ++i) buf[i] = frame[i] * window[i];
    std::fill(buf + frame_len, buf + nfft, 0.0);
    fft.forward();
    for (std::size_t k = 0; k < magnitude.size(); ++k) magnitude[k] = std::abs(fft.freq()[k]);
    for (std::size_t b = 0; b < cfg.num_bins; ++b)
      out.at(t, b) = static_cast<float>(std::log(std::max(bank.apply(b, magnitude.data()), kLogFloor)));
  }
  return out;
}

}  // namespace pmct
