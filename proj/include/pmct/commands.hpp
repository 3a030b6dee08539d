// pmct/commands.hpp

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
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pmct/attention.hpp"
#include "pmct/pipeline.hpp"

namespace pmct {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

inline constexpr char kProvenanceFile[] = "provenance.jsonl";

/// Allowed gap between a recorded SNR and the one measured on recomputation.
inline constexpr double kSnrToleranceDb = 1e-6;

namespace detail {

struct Outcome {
  std::optional<UtteranceOutput> output;
  std::string error;
};

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& id, const char* ext) {
  return cfg.out / (id + ext);
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? kExitConfigError : kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

inline AudioBuffer load_utterance(const RunConfig& cfg, const ManifestEntry& entry) {
  AudioBuffer x = load_wav(resolve_path(cfg.root, entry.audio_path), WavLoadOptions{true});
  x.id = entry.id;
  return x;
}

}  // namespace detail

/// Augments every manifest entry, writing <id>.wav and/or <id>.feat plus
/// provenance.jsonl (manifest order) under cfg.out.
inline int cmd_augment(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    validate(cfg);
    const std::vector<ManifestEntry> manifest = load_manifest(cfg.manifest);
    if (manifest.empty()) {
      err << "warning: manifest " << cfg.manifest.string() << " is empty; nothing to do\n";
      return kExitOk;
    }
    const Resources res = load_resources(cfg);
    std::filesystem::create_directories(cfg.out);

    std::vector<detail::Outcome> outcomes(manifest.size());
    std::atomic<bool> stop{false};
    parallel_for(manifest.size(), cfg.workers, [&](std::size_t i) {
      const ManifestEntry& entry = manifest[i];
      try {
        UtteranceOutput o = process_utterance(cfg, res, entry, detail::load_utterance(cfg, entry));
        if (o.wav) write_file_atomic(detail::output_path(cfg, o.id, ".wav"), *o.wav);
        if (o.features) write_file_atomic(detail::output_path(cfg, o.id, ".feat"), *o.features);
        o.wav.reset();
        o.features.reset();
        outcomes[i].output = std::move(o);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
        if (cfg.fail_fast) stop = true;
      }
    }, &stop);

    std::ostringstream sidecar;
    std::size_t ok = 0, failed = 0, clipped = 0, warnings = 0;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const detail::Outcome& o = outcomes[i];
      if (o.output) {
        ++ok;
        clipped += o.output->clipped;
        for (const std::string& w : o.output->warnings) {
          err << "warning: " << manifest[i].id << ": " << w << "\n";
          ++warnings;
        }
        sidecar << o.output->provenance.dump() << "\n";
      } else if (!o.error.empty()) {
        ++failed;
        err << "error: " << manifest[i].id << ": " << o.error << "\n";
      }
    }
    const std::string text = sidecar.str();
    write_file_atomic(cfg.out / kProvenanceFile, Bytes(text.begin(), text.end()));

    const std::size_t skipped = manifest.size() - ok - failed;
    out << "augment: mode=" << to_string(cfg.mode) << " utterances=" << manifest.size() << " ok=" << ok
        << " failed=" << failed << " skipped=" << skipped << " clipped_samples=" << clipped
        << " warnings=" << warnings << "\n";
    if (failed > 0 && cfg.fail_fast) return kExitDataError;
    return ok > 0 ? kExitOk : kExitDataError;
  });
}

/// Log-mel extraction only; no augmentation and no SpecAugment.
inline int cmd_features(const RunConfig& cfg_in, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    RunConfig cfg = cfg_in;
    cfg.mode = Mode::Clean;
    validate(cfg);
    const std::vector<ManifestEntry> manifest = load_manifest(cfg.manifest);
    if (manifest.empty()) {
      err << "warning: manifest " << cfg.manifest.string() << " is empty; nothing to do\n";
      return kExitOk;
    }
    std::filesystem::create_directories(cfg.out);
    std::vector<std::string> errors(manifest.size());
    std::atomic<bool> stop{false};
    parallel_for(manifest.size(), cfg.workers, [&](std::size_t i) {
      try {
        require_safe_id(manifest[i].id);
        FeatureMatrix m = log_mel_features(detail::load_utterance(cfg, manifest[i]), cfg.mel);
        m.id = manifest[i].id;
        write_features(m, detail::output_path(cfg, m.id, ".feat"));
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (cfg.fail_fast) stop = true;
      }
    }, &stop);
    std::size_t failed = 0;
    for (std::size_t i = 0; i < manifest.size(); ++i)
      if (!errors[i].empty()) {
        ++failed;
        err << "error: " << manifest[i].id << ": " << errors[i] << "\n";
      }
    const std::size_t ok = manifest.size() - failed;
    out << "features: utterances=" << manifest.size() << " ok=" << ok << " failed=" << failed << "\n";
    if (failed > 0 && cfg.fail_fast) return kExitDataError;
    return ok > 0 ? kExitOk : kExitDataError;
  });
}

struct VerifyResult {
  std::size_t checked = 0;
  std::vector<std::string> mismatched;
};

/// Recomputes every utterance listed in the provenance sidecar and checks
/// the record, the output files and the measured SNR.
inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err,
                      VerifyResult* result = nullptr) {
  return detail::guarded(err, [&] {
    validate(cfg);
    const std::filesystem::path sidecar = cfg.out / kProvenanceFile;
    std::ifstream in(sidecar);
    if (!in) fail(ErrorCode::FileNotFound, sidecar.string());
    std::vector<nlohmann::json> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        records.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::ParseError, sidecar.string() + " line " + std::to_string(lineno) + ": " + e.what());
      }
    }

    const std::vector<ManifestEntry> manifest = load_manifest(cfg.manifest);
    std::unordered_map<std::string, const ManifestEntry*> by_id;
    for (const ManifestEntry& e : manifest) by_id[e.id] = &e;
    const Resources res = load_resources(cfg);

    std::vector<std::string> problems(records.size());
    std::vector<std::string> report(records.size());
    parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
      const nlohmann::json& rec = records[i];
      const std::string id = rec.value("id", std::string("<missing id>"));
      std::vector<std::string> why;
      try {
        auto it = by_id.find(id);
        if (it == by_id.end()) fail(ErrorCode::MismatchFound, "id not in manifest");
        UtteranceOutput o = process_utterance(cfg, res, *it->second, detail::load_utterance(cfg, *it->second), true);
        if (nlohmann::json::parse(o.provenance.dump()) != rec) why.push_back("provenance record differs");
        const auto compare = [&](const std::optional<Bytes>& expect, const char* ext) {
          if (!expect) return;
          const auto path = detail::output_path(cfg, id, ext);
          if (!std::filesystem::exists(path)) {
            why.push_back(std::string(ext + 1) + " output missing");
            return;
          }
          if (read_file(path) != *expect) why.push_back(std::string(ext + 1) + " output differs");
        };
        compare(o.wav, ".wav");
        compare(o.features, ".feat");
        std::ostringstream line_out;
        line_out << id;
        if (o.measured_snr_db && rec.contains("snr_db") && rec["snr_db"].is_number()) {
          const double recorded = rec["snr_db"].get<double>();
          const double diff = std::abs(*o.measured_snr_db - recorded);
          line_out << std::setprecision(10) << " snr_recorded=" << recorded << " snr_measured=" << *o.measured_snr_db;
          if (!(diff <= kSnrToleranceDb)) why.push_back("measured SNR differs by " + std::to_string(diff) + " dB");
        }
        report[i] = line_out.str();
      } catch (const std::exception& e) {
        why.push_back(e.what());
        report[i] = id;
      }
      std::string joined;
      for (const std::string& w : why) joined += (joined.empty() ? "" : "; ") + w;
      problems[i] = joined;
    });

    VerifyResult vr;
    vr.checked = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
      const bool ok = problems[i].empty();
      out << (ok ? "ok       " : "MISMATCH ") << report[i] << (ok ? "" : " (" + problems[i] + ")") << "\n";
      if (!ok) vr.mismatched.push_back(records[i].value("id", std::string("<missing id>")));
    }
    if (vr.mismatched.empty()) {
      out << "verify: PASS, " << vr.checked << " utterances, 0 mismatches\n";
    } else {
      std::string ids;
      for (const std::string& id : vr.mismatched) ids += (ids.empty() ? "" : ", ") + id;
      out << "verify: FAIL, " << vr.checked << " utterances, " << vr.mismatched.size() << " mismatches\n";
      err << "error: MismatchFound: " << ids << "\n";
    }
    if (result) *result = vr;
    return vr.mismatched.empty() ? kExitOk : kExitDataError;
  });
}

struct AttnSkewOptions {
  /// One directory per model; with two, the first is the reference (S_m)
  /// and the second the candidate (S_p).
  std::vector<std::filesystem::path> model_dirs;
  SkewnessEstimator estimator = SkewnessEstimator::MomentG1;
  /// "-" prints JSON to stdout instead of the text report.
  std::optional<std::filesystem::path> json_out;
  unsigned workers = 1;
};

inline SkewnessReport score_directory(const std::filesystem::path& dir, SkewnessEstimator est,
                                      unsigned workers) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::FileNotFound, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::InvalidArgument, "no attention files in " + dir.string());

  std::vector<std::optional<UtteranceSkewness>> per(files.size());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) {
    try {
      const AttentionTensorSet set = read_attention(files[i]);
      shapes[i] = {set.num_layers, set.num_heads};
      per[i] = utterance_skewness(set, est);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const std::string& e : errors)
    if (!e.empty()) throw Error(ErrorCode::InvalidArgument, e);
  for (std::size_t i = 1; i < shapes.size(); ++i)
    if (shapes[i] != shapes[0])
      fail(ErrorCode::InconsistentShape, files[i].string() + " has a different layer/head count");
  std::vector<UtteranceSkewness> flat;
  for (auto& p : per) flat.push_back(std::move(*p));
  return reduce_skewness(flat, shapes[0].first, shapes[0].second);
}

inline nlohmann::ordered_json to_json(const SkewnessReport& r) {
  nlohmann::ordered_json j;
  j["S"] = r.dataset_mean ? nlohmann::ordered_json(*r.dataset_mean) : nlohmann::ordered_json();
  j["num_layers"] = r.num_layers;
  j["num_heads"] = r.num_heads;
  j["per_utterance"] = r.per_utterance;
  j["excluded"] = r.excluded;
  j["per_layer_head"] = r.per_layer_head;
  return j;
}

inline int cmd_attn_skew(const AttnSkewOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (opts.model_dirs.empty() || opts.model_dirs.size() > 2)
      fail(ErrorCode::ConfigError, "attn-skew takes one or two model directories");
    if (opts.workers == 0) fail(ErrorCode::ConfigError, "workers must be at least 1");
    std::vector<SkewnessReport> reports;
    for (const auto& dir : opts.model_dirs) reports.push_back(score_directory(dir, opts.estimator, opts.workers));

    nlohmann::ordered_json j;
    j["estimator"] = opts.estimator == SkewnessEstimator::MomentG1 ? "g1" : "G1";
    j["models"] = nlohmann::ordered_json::array();
    std::ostringstream text;
    text << std::setprecision(10);
    bool all_defined = true;
    for (std::size_t m = 0; m < reports.size(); ++m) {
      const SkewnessReport& r = reports[m];
      for (const std::string& id : r.excluded)
        err << "warning: DegenerateVector: " << opts.model_dirs[m].string() << "/" << id
            << " has a zero-variance eigenvalue spectrum; excluded\n";
      auto mj = to_json(r);
      mj["dir"] = opts.model_dirs[m].string();
      j["models"].push_back(std::move(mj));
      text << "model " << opts.model_dirs[m].string() << ": utterances=" << r.per_utterance.size()
           << " excluded=" << r.excluded.size() << " S=";
      if (r.dataset_mean) text << *r.dataset_mean << "\n";
      else text << "undefined\n";
      all_defined = all_defined && r.dataset_mean.has_value();
    }
    j["relative_drop"] = nullptr;
    if (reports.size() == 2 && all_defined) {
      if (*reports[0].dataset_mean == 0.0) {
        err << "warning: reference S is zero; relative drop undefined\n";
      } else {
        const double drop = relative_drop(*reports[0].dataset_mean, *reports[1].dataset_mean);
        j["relative_drop"] = drop;
        text << "relative_drop (S_ref - S_cand) / S_ref = " << drop << "\n";
      }
    }

    if (opts.json_out && *opts.json_out == "-") {
      out << j.dump(2) << "\n";
    } else {
      out << text.str();
      if (opts.json_out) {
        const std::string s = j.dump(2) + "\n";
        write_file_atomic(*opts.json_out, Bytes(s.begin(), s.end()));
      }
    }
    return all_defined ? kExitOk : kExitDataError;
  });
}

}  // namespace pmct
