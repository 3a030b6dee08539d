// pmct/pipeline.hpp

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

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pmct/config.hpp"
#include "pmct/corpus.hpp"
#include "pmct/dsp.hpp"
#include "pmct/feature_io.hpp"
#include "pmct/mamp.hpp"
#include "pmct/mel.hpp"
#include "pmct/specaugment.hpp"
#include "pmct/wav.hpp"

namespace pmct {

/// RIR and noise pools with their audio loaded. Immutable once built and
/// shared read-only by all workers.
struct Resources {
  ResourcePool rir_pool{ResourceKind::Rir, {}};
  ResourcePool noise_pool{ResourceKind::Noise, {}};
  std::vector<ImpulseResponse> rirs;
  std::vector<AudioBuffer> noises;
};

inline Resources load_resources(const RunConfig& cfg) {
  Resources r;
  if (cfg.mode == Mode::Clean) return r;
  r.rir_pool = load_pool(cfg.rir_list, ResourceKind::Rir);
  r.noise_pool = load_pool(cfg.noise_list, ResourceKind::Noise);
  if (r.rir_pool.empty()) fail(ErrorCode::EmptyPool, "RIR list " + cfg.rir_list.string() + " is empty");
  if (r.noise_pool.empty()) fail(ErrorCode::EmptyPool, "noise list " + cfg.noise_list.string() + " is empty");
  const WavLoadOptions strict{true};
  for (const PoolEntry& e : r.rir_pool.entries) {
    AudioBuffer taps = load_wav(resolve_path(cfg.root, e.path), strict);
    r.rirs.emplace_back(std::move(taps.samples), e.id);
  }
  for (const PoolEntry& e : r.noise_pool.entries) {
    AudioBuffer n = load_wav(resolve_path(cfg.root, e.path), strict);
    n.id = e.id;
    require_valid(n, "noise");
    if (mean_power(n.samples) == 0.0) fail(ErrorCode::SilentNoise, "noise '" + e.id + "' has zero power");
    r.noises.push_back(std::move(n));
  }
  return r;
}

/// Output ids become file names.
inline void require_safe_id(const std::string& id) {
  if (id.empty() || id == "." || id == ".." || id.find_first_of("/\\") != std::string::npos ||
      id.find('\0') != std::string::npos)
    fail(ErrorCode::InvalidArgument, "utterance id '" + id + "' cannot be used as a file name");
}

struct UtteranceOutput {
  std::string id;
  std::optional<Bytes> wav;
  std::optional<Bytes> features;
  /// One provenance sidecar record.
  nlohmann::ordered_json provenance;
  std::size_t clipped = 0;
  std::vector<std::string> warnings;
  /// 10*log10(P_y / P_{g*noise}) recomputed from the mixture components;
  /// only filled when requested and noise was actually added.
  std::optional<double> measured_snr_db;
};

/// Runs the configured augmenter on one utterance. A pure function of
/// (cfg, resources, entry id, x): the generator is derived from the seed,
/// the id and the epoch.
inline UtteranceOutput process_utterance(const RunConfig& cfg, const Resources& res,
                                         const ManifestEntry& entry, const AudioBuffer& x,
                                         bool measure_snr = false) {
  require_safe_id(entry.id);
  require_valid(x, "utterance");
  UtteranceOutput out;
  out.id = entry.id;
  const SeedScheme seed{cfg.seed};
  std::optional<Rng> rng;
  AudioBuffer z;

  auto& prov = out.provenance;
  prov["id"] = entry.id;
  prov["mode"] = std::string(to_string(cfg.mode));
  prov["epoch"] = cfg.epoch;

  const auto record_snr = [&](const AudioBuffer& pre_noise, const AudioBuffer& noise,
                              std::size_t offset, double gain) {
    if (!measure_snr) return;
    std::vector<double> scaled = noise_segment(noise.samples, pre_noise.size(), offset);
    for (double& v : scaled) v *= gain;
    out.measured_snr_db = measured_snr_db(pre_noise.samples, scaled);
  };

  if (cfg.mode == Mode::Clean) {
    rng.emplace(seed.derive(entry.id, cfg.epoch));
    z = x;
    prov["rir_id"] = "";
    prov["noise_id"] = "";
    prov["snr_db"] = nullptr;
    prov["pi_effective"] = nullptr;
    prov["patch_len"] = nullptr;
    prov["sources"] = nlohmann::ordered_json::array();
  } else {
    const SnrRange& range = cfg.mode == Mode::Pmct ? cfg.mamp.snr_range : cfg.mct.snr_range;
    ResourceDraw draw = sample_resources(entry, res.rir_pool, res.noise_pool, range, seed, cfg.epoch);
    const ImpulseResponse& h = res.rirs.at(draw.rir_index);
    const AudioBuffer& noise = res.noises.at(draw.noise_index);
    prov["rir_id"] = h.id();
    prov["noise_id"] = noise.id;

    if (cfg.mode == Mode::Pmct) {
      PmctResult r = augment_pmct_at_snr(x, h, noise, draw.snr_db, cfg.mamp, draw.rng);
      auto src = nlohmann::ordered_json::array();
      for (const Patch& p : r.plan.patches) src.push_back(std::string(1, to_char(p.source)));
      prov["snr_db"] = r.snr_db;
      prov["pi_effective"] = r.pi_effective;
      prov["patch_len"] = patch_len_samples(cfg.mamp, x.sample_rate);
      prov["sources"] = std::move(src);
      prov["noise_offset"] = r.noise_offset;
      if (r.silent_signal) out.warnings.push_back("silent signal, noise not added");
      else record_snr(apply_rir(x, h), noise, r.noise_offset, r.noise_gain);
      z = std::move(r.z);
    } else {
      MctResult r = augment_mct_at_snr(x, h, noise, draw.snr_db, cfg.mct, draw.rng);
      prov["snr_db"] = r.noise_applied ? nlohmann::ordered_json(r.snr_db) : nlohmann::ordered_json();
      prov["pi_effective"] = nullptr;
      prov["patch_len"] = nullptr;
      prov["sources"] = nlohmann::ordered_json::array();
      prov["noise_offset"] = r.noise_offset;
      prov["reverb_applied"] = r.reverb_applied;
      prov["noise_applied"] = r.noise_applied;
      if (r.silent_signal) out.warnings.push_back("silent signal, noise not added");
      else if (r.noise_applied)
        record_snr(r.reverb_applied ? apply_rir(x, h) : x, noise, r.noise_offset, r.noise_gain);
      z = std::move(r.out);
    }
    rng.emplace(draw.rng);
  }
  z.id = entry.id;

  if (cfg.output_kind != OutputKind::Features) {
    WavSaveStats stats;
    out.wav = encode_wav(z, cfg.wav_encoding, &stats);
    out.clipped = stats.clipped;
    if (stats.clipped > 0) out.warnings.push_back(std::to_string(stats.clipped) + " samples clipped");
  }
  if (cfg.output_kind != OutputKind::Wav) {
    FeatureMatrix m = log_mel_features(z, cfg.mel);
    if (cfg.specaugment)
      m = apply_specaugment(m, derive_policy(cfg.specaugment_base, *cfg.specaugment), *rng);
    out.features = encode_features(m);
  }
  prov["specaugment"] = cfg.output_kind != OutputKind::Wav && cfg.specaugment.has_value();
  return out;
}

/// Runs task(i) for i in [0, n) on `workers` threads. Tasks are claimed in
/// index order; once `stop` is set no new task starts.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task,
                         const std::atomic<bool>* stop = nullptr) {
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      if (stop && stop->load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      task(i);
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (count == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
}

}  // namespace pmct
