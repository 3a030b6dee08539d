// pmct/feature_io.hpp

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

#include <cstring>
#include <filesystem>

#include "pmct/audio.hpp"
#include "pmct/file_util.hpp"

namespace pmct {

// Layout (little-endian):
//   "PMCTFEAT" | u32 version=1 | u32 T | u32 F | u32 frame_shift_ms |
//   u32 frame_length_ms | T*F float32, time-major
inline constexpr char kFeatureMagic[] = "PMCTFEAT";
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 28;

inline Bytes encode_features(const FeatureMatrix& m) {
  if (m.num_frames == 0 || m.num_bins == 0 ||
      m.data.size() != static_cast<std::size_t>(m.num_frames) * m.num_bins)
    fail(ErrorCode::InvalidArgument, "feature matrix '" + m.id + "' has an invalid shape");
  if (!all_finite(m.data))
    fail(ErrorCode::NonFinite, "feature matrix '" + m.id + "' has NaN or Inf");
  Bytes out;
  out.reserve(kFeatureHeaderBytes + 4 * m.data.size());
  detail::put_tag(out, kFeatureMagic);
  detail::put_u32(out, kFeatureVersion);
  detail::put_u32(out, m.num_frames);
  detail::put_u32(out, m.num_bins);
  detail::put_u32(out, m.frame_shift_ms);
  detail::put_u32(out, m.frame_length_ms);
  for (float v : m.data) detail::put_f32(out, v);
  return out;
}

inline FeatureMatrix decode_features(const Bytes& bytes, const std::string& name = "<memory>") {
  using namespace detail;
  if (bytes.size() < kFeatureHeaderBytes || std::memcmp(bytes.data(), kFeatureMagic, 8) != 0)
    fail(ErrorCode::MalformedHeader, name + ": bad feature magic");
  const std::uint8_t* p = bytes.data() + 8;
  if (get_u32(p) != kFeatureVersion)
    fail(ErrorCode::MalformedHeader, name + ": unsupported version " + std::to_string(get_u32(p)));
  FeatureMatrix m;
  m.num_frames = get_u32(p + 4);
  m.num_bins = get_u32(p + 8);
  m.frame_shift_ms = get_u32(p + 12);
  m.frame_length_ms = get_u32(p + 16);
  if (m.num_frames == 0 || m.num_bins == 0)
    fail(ErrorCode::MalformedHeader, name + ": empty feature matrix");
  const std::uint64_t count = static_cast<std::uint64_t>(m.num_frames) * m.num_bins;
  if (bytes.size() - kFeatureHeaderBytes != count * 4)
    fail(ErrorCode::MalformedHeader, name + ": payload size does not match T*F");
  m.data.resize(count);
  const std::uint8_t* payload = bytes.data() + kFeatureHeaderBytes;
  for (std::size_t i = 0; i < count; ++i) m.data[i] = get_f32(payload + 4 * i);
  if (!all_finite(m.data)) fail(ErrorCode::NonFinite, name + ": NaN or Inf in payload");
  return m;
}

inline void write_features(const FeatureMatrix& m, const std::filesystem::path& path) {
  write_file_atomic(path, encode_features(m));
}

inline FeatureMatrix read_features(const std::filesystem::path& path) {
  FeatureMatrix m = decode_features(read_file(path), path.string());
  m.id = path.stem().string();
  return m;
}

}  // namespace pmct
