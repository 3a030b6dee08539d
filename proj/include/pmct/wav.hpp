// pmct/wav.hpp

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
#include <cstring>
#include <filesystem>
#include <string>

#include "pmct/audio.hpp"
#include "pmct/file_util.hpp"

namespace pmct {

enum class WavEncoding { Pcm16, Float32 };

struct WavLoadOptions {
  /// Reject files whose header rate is not kSampleRate.
  bool strict_rate = false;
};

struct WavSaveStats {
  /// Samples outside [-1, 1] that were hard-clipped (pcm16 only).
  std::size_t clipped = 0;
};

namespace detail {

inline constexpr std::uint16_t kFormatPcm = 1;
inline constexpr std::uint16_t kFormatFloat = 3;
inline constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace detail

/// Decodes a RIFF/WAVE image. Multichannel input is averaged to mono.
inline AudioBuffer decode_wav(const Bytes& bytes, const WavLoadOptions& opts = {},
                              const std::string& name = "<memory>") {
  using namespace detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail(ErrorCode::UnsupportedFormat, name + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, block_align = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body)
      fail(ErrorCode::MalformedHeader, name + ": chunk overruns file");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail(ErrorCode::MalformedHeader, name + ": short fmt chunk");
      const std::uint8_t* f = bytes.data() + body;
      format = get_u16(f);
      channels = get_u16(f + 2);
      rate = get_u32(f + 4);
      block_align = get_u16(f + 12);
      bits = get_u16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) fail(ErrorCode::MalformedHeader, name + ": short extensible fmt");
        format = get_u16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) fail(ErrorCode::MalformedHeader, name + ": missing fmt chunk");
  if (data == nullptr) fail(ErrorCode::MalformedHeader, name + ": missing data chunk");
  if (channels == 0 || rate == 0)
    fail(ErrorCode::MalformedHeader, name + ": zero channels or sample rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    fail(ErrorCode::UnsupportedFormat,
         name + ": only 16-bit PCM and 32-bit float are supported (format " +
             std::to_string(format) + ", " + std::to_string(bits) + " bits)");
  const std::size_t sample_bytes = bits / 8;
  if (block_align != channels * sample_bytes)
    fail(ErrorCode::MalformedHeader, name + ": inconsistent block alignment");
  if (opts.strict_rate && rate != static_cast<std::uint32_t>(kSampleRate))
    fail(ErrorCode::SampleRateMismatch,
         name + ": sample rate " + std::to_string(rate) + " != " +
             std::to_string(kSampleRate));

  const std::size_t frames = data_size / block_align;
  AudioBuffer out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(frames);
  const double inv_channels = 1.0 / channels;
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* frame = data + i * block_align;
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* s = frame + c * sample_bytes;
      if (pcm16) {
        acc += static_cast<std::int16_t>(get_u16(s)) / 32768.0;
      } else {
        const float v = get_f32(s);
        if (!std::isfinite(v))
          fail(ErrorCode::NonFinite, name + ": NaN/Inf sample at frame " + std::to_string(i));
        acc += v;
      }
    }
    out.samples[i] = channels == 1 ? acc : acc * inv_channels;
  }
  return out;
}

inline AudioBuffer load_wav(const std::filesystem::path& path,
                            const WavLoadOptions& opts = {}) {
  AudioBuffer buf = decode_wav(read_file(path), opts, path.string());
  buf.id = path.stem().string();
  return buf;
}

/// Encodes mono audio. pcm16 uses round(s * 32768) clamped to the int16
/// range; float32 narrows each sample to float.
inline Bytes encode_wav(const AudioBuffer& buf, WavEncoding enc,
                        WavSaveStats* stats = nullptr) {
  using namespace detail;
  const std::uint16_t bits = enc == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint32_t data_size = static_cast<std::uint32_t>(buf.size() * (bits / 8));
  Bytes out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, enc == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate) * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  std::size_t clipped = 0;
  for (double s : buf.samples) {
    if (enc == WavEncoding::Float32) {
      put_f32(out, static_cast<float>(s));
      continue;
    }
    if (s > 1.0 || s < -1.0) ++clipped;
    const double q = std::clamp(std::nearbyint(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (stats) stats->clipped = clipped;
  return out;
}

inline WavSaveStats save_wav(const AudioBuffer& buf, const std::filesystem::path& path,
                             WavEncoding enc = WavEncoding::Float32) {
  if (!all_finite(buf.samples))
    fail(ErrorCode::NonFinite, "refusing to write non-finite samples to " + path.string());
  WavSaveStats stats;
  write_file_atomic(path, encode_wav(buf, enc, &stats));
  return stats;
}

}  // namespace pmct
