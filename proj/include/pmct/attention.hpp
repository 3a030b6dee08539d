// pmct/attention.hpp

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
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmct/error.hpp"
#include "pmct/file_util.hpp"

namespace pmct {

/// Self-attention maps of one utterance: layers x heads square T x T
/// matrices, stored (layer, head, row, col) row-major.
struct AttentionTensorSet {
  std::string utterance_id;
  std::uint32_t num_layers = 0;
  std::uint32_t num_heads = 0;
  std::uint32_t num_frames = 0;
  std::vector<float> data;

  AttentionTensorSet() = default;
  AttentionTensorSet(std::string id, std::uint32_t layers, std::uint32_t heads, std::uint32_t frames)
      : utterance_id(std::move(id)), num_layers(layers), num_heads(heads), num_frames(frames),
        data(static_cast<std::size_t>(layers) * heads * frames * frames, 0.0f) {}

  std::size_t map_size() const noexcept { return static_cast<std::size_t>(num_frames) * num_frames; }

  std::span<float> map(std::size_t layer, std::size_t head) {
    return {data.data() + (layer * num_heads + head) * map_size(), map_size()};
  }
  std::span<const float> map(std::size_t layer, std::size_t head) const {
    return {data.data() + (layer * num_heads + head) * map_size(), map_size()};
  }

  Eigen::MatrixXd matrix(std::size_t layer, std::size_t head) const {
    const auto m = map(layer, head);
    Eigen::MatrixXd a(num_frames, num_frames);
    for (std::size_t r = 0; r < num_frames; ++r)
      for (std::size_t c = 0; c < num_frames; ++c) a(r, c) = m[r * num_frames + c];
    return a;
  }
};

/// Rows must be nonnegative distributions (sum 1 within `tol`).
inline void validate_attention(const AttentionTensorSet& set, double tol = 1e-4) {
  if (set.num_layers == 0 || set.num_heads == 0 || set.num_frames == 0)
    fail(ErrorCode::InconsistentShape, "attention set '" + set.utterance_id + "' is empty");
  if (set.data.size() != set.num_layers * set.num_heads * set.map_size())
    fail(ErrorCode::InconsistentShape, "attention set '" + set.utterance_id + "' has wrong size");
  const std::size_t t = set.num_frames;
  for (std::size_t l = 0; l < set.num_layers; ++l)
    for (std::size_t h = 0; h < set.num_heads; ++h) {
      const auto m = set.map(l, h);
      for (std::size_t r = 0; r < t; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < t; ++c) {
          const float v = m[r * t + c];
          if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "attention '" + set.utterance_id + "'");
          if (v < 0.0f)
            fail(ErrorCode::InvalidArgument, "attention '" + set.utterance_id + "' has a negative weight");
          sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
          fail(ErrorCode::InvalidArgument,
               "attention '" + set.utterance_id + "' layer " + std::to_string(l) + " head " +
                   std::to_string(h) + " row " + std::to_string(r) + " sums to " + std::to_string(sum));
      }
    }
}

// Layout (little-endian):
//   "PMCTATTN" | u32 version=1 | u32 L | u32 H | u32 T | L*H*T*T float32
inline constexpr char kAttentionMagic[] = "PMCTATTN";
inline constexpr std::uint32_t kAttentionVersion = 1;
inline constexpr std::size_t kAttentionHeaderBytes = 24;

inline Bytes encode_attention(const AttentionTensorSet& set) {
  if (set.data.size() != set.num_layers * set.num_heads * set.map_size())
    fail(ErrorCode::InconsistentShape, "attention set '" + set.utterance_id + "' has wrong size");
  Bytes out;
  out.reserve(kAttentionHeaderBytes + 4 * set.data.size());
  detail::put_tag(out, kAttentionMagic);
  detail::put_u32(out, kAttentionVersion);
  detail::put_u32(out, set.num_layers);
  detail::put_u32(out, set.num_heads);
  detail::put_u32(out, set.num_frames);
  for (float v : set.data) detail::put_f32(out, v);
  return out;
}

inline AttentionTensorSet decode_attention(const Bytes& bytes, std::string id = "<memory>") {
  using namespace detail;
  if (bytes.size() < kAttentionHeaderBytes || std::memcmp(bytes.data(), kAttentionMagic, 8) != 0)
    fail(ErrorCode::MalformedHeader, id + ": bad attention magic");
  const std::uint8_t* p = bytes.data() + 8;
  if (get_u32(p) != kAttentionVersion) fail(ErrorCode::MalformedHeader, id + ": unsupported version");
  AttentionTensorSet set;
  set.utterance_id = std::move(id);
  set.num_layers = get_u32(p + 4);
  set.num_heads = get_u32(p + 8);
  set.num_frames = get_u32(p + 12);
  if (set.num_layers == 0 || set.num_heads == 0 || set.num_frames == 0)
    fail(ErrorCode::MalformedHeader, set.utterance_id + ": zero dimension");
  const std::uint64_t count =
      static_cast<std::uint64_t>(set.num_layers) * set.num_heads * set.num_frames * set.num_frames;
  if (bytes.size() - kAttentionHeaderBytes != count * 4)
    fail(ErrorCode::MalformedHeader, set.utterance_id + ": payload size does not match L*H*T*T");
  set.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) set.data[i] = get_f32(bytes.data() + kAttentionHeaderBytes + 4 * i);
  return set;
}

/// The file name is the utterance id.
inline AttentionTensorSet read_attention(const std::filesystem::path& path, bool check_rows = true) {
  AttentionTensorSet set = decode_attention(read_file(path), path.filename().string());
  if (check_rows) validate_attention(set);
  return set;
}

inline void write_attention(const AttentionTensorSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, encode_attention(set));
}

/// Absolute eigenvalues of A * A^T, sorted in decreasing order. Negative
/// round-off no larger than 1e-12 * lambda_max is clamped to zero.
inline std::vector<double> eigen_spectrum(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    fail(ErrorCode::InconsistentShape, "eigen_spectrum needs a nonempty square matrix");
  if (!a.allFinite()) fail(ErrorCode::NonFinite, "eigen_spectrum input has NaN or Inf");
  const Eigen::MatrixXd cov = a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "eigensolver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double lambda_max = ev.cwiseAbs().maxCoeff();
  std::vector<double> out(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double v = ev[i];
    out[static_cast<std::size_t>(i)] = (v < 0.0 && -v <= 1e-12 * lambda_max) ? 0.0 : std::abs(v);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

enum class SkewnessEstimator {
  /// g1 = m3 / m2^(3/2), population central moments.
  MomentG1,
  /// G1 = g1 * sqrt(n (n - 1)) / (n - 2).
  AdjustedG1,
};

/// Throws DegenerateVector for fewer than two values or zero variance.
inline double skewness(std::span<const double> v, SkewnessEstimator est = SkewnessEstimator::MomentG1) {
  const std::size_t n = v.size();
  if (n < 2 || (est == SkewnessEstimator::AdjustedG1 && n < 3))
    fail(ErrorCode::DegenerateVector, "skewness needs more values");
  CompensatedSum s;
  double max_abs = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "skewness input has NaN or Inf");
    s.add(x);
    max_abs = std::max(max_abs, std::abs(x));
  }
  const double mean = s.value() / static_cast<double>(n);
  CompensatedSum s2, s3;
  for (double x : v) {
    const double d = x - mean;
    s2.add(d * d);
    s3.add(d * d * d);
  }
  const double m2 = s2.value() / static_cast<double>(n);
  const double m3 = s3.value() / static_cast<double>(n);
  const double floor = 1e-12 * max_abs;
  if (m2 <= floor * floor) fail(ErrorCode::DegenerateVector, "values have zero variance");
  const double g1 = m3 / std::pow(m2, 1.5);
  if (est == SkewnessEstimator::MomentG1) return g1;
  const double nd = static_cast<double>(n);
  return g1 * std::sqrt(nd * (nd - 1.0)) / (nd - 2.0);
}

struct UtteranceSkewness {
  std::string utterance_id;
  /// Mean of s(lambda) over layers and heads; empty if any head was degenerate.
  std::optional<double> score;
  /// s(lambda^{l,h}) in (layer, head) order; NaN where degenerate.
  std::vector<double> per_layer_head;
};

inline UtteranceSkewness utterance_skewness(const AttentionTensorSet& set,
                                            SkewnessEstimator est = SkewnessEstimator::MomentG1) {
  if (set.num_layers == 0 || set.num_heads == 0 ||
      set.data.size() != set.num_layers * set.num_heads * set.map_size())
    fail(ErrorCode::InconsistentShape, "attention set '" + set.utterance_id + "' has wrong size");
  UtteranceSkewness out;
  out.utterance_id = set.utterance_id;
  CompensatedSum total;
  bool degenerate = false;
  for (std::size_t l = 0; l < set.num_layers; ++l)
    for (std::size_t h = 0; h < set.num_heads; ++h) {
      const std::vector<double> lambda = eigen_spectrum(set.matrix(l, h));
      double s = std::numeric_limits<double>::quiet_NaN();
      try {
        s = skewness(lambda, est);
        total.add(s);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateVector) throw;
        degenerate = true;
      }
      out.per_layer_head.push_back(s);
    }
  if (!degenerate)
    out.score = total.value() / static_cast<double>(set.num_layers * set.num_heads);
  return out;
}

struct SkewnessReport {
  std::uint32_t num_layers = 0;
  std::uint32_t num_heads = 0;
  std::map<std::string, double> per_utterance;
  /// Utterances left out because some head had a zero-variance spectrum.
  std::vector<std::string> excluded;
  /// Mean of per_utterance; empty when every utterance was excluded.
  std::optional<double> dataset_mean;
  /// Mean over included utterances of s(lambda^{l,h}), (layer, head) order.
  std::vector<double> per_layer_head;
};

/// Folds per-utterance results in the given order. Sums are compensated, so
/// the order changes the result by at most a few ulps.
inline SkewnessReport reduce_skewness(std::span<const UtteranceSkewness> utterances,
                                      std::uint32_t num_layers, std::uint32_t num_heads) {
  SkewnessReport report;
  report.num_layers = num_layers;
  report.num_heads = num_heads;
  const std::size_t heads = static_cast<std::size_t>(num_layers) * num_heads;
  std::vector<CompensatedSum> per_head(heads);
  CompensatedSum total;
  for (const UtteranceSkewness& u : utterances) {
    if (u.per_layer_head.size() != heads)
      fail(ErrorCode::InconsistentShape, "utterance '" + u.utterance_id + "' has a different layer/head count");
    if (!u.score) {
      report.excluded.push_back(u.utterance_id);
      continue;
    }
    report.per_utterance[u.utterance_id] = *u.score;
    total.add(*u.score);
    for (std::size_t i = 0; i < heads; ++i) per_head[i].add(u.per_layer_head[i]);
  }
  const std::size_t included = report.per_utterance.size();
  if (included > 0) {
    report.dataset_mean = total.value() / static_cast<double>(included);
    for (const CompensatedSum& s : per_head)
      report.per_layer_head.push_back(s.value() / static_cast<double>(included));
  }
  return report;
}

/// S = mean over utterances of (1 / (L*H)) * sum_{l,h} s(lambda^{l,h}).
inline SkewnessReport skewness_score(std::span<const AttentionTensorSet> dataset,
                                SkewnessEstimator est = SkewnessEstimator::MomentG1) {
  if (dataset.empty()) fail(ErrorCode::InvalidArgument, "no attention sets given");
  const std::uint32_t layers = dataset.front().num_layers;
  const std::uint32_t heads = dataset.front().num_heads;
  std::vector<UtteranceSkewness> per;
  per.reserve(dataset.size());
  for (const AttentionTensorSet& set : dataset) {
    if (set.num_layers != layers || set.num_heads != heads)
      fail(ErrorCode::InconsistentShape, "utterance '" + set.utterance_id + "' has " +
                                             std::to_string(set.num_layers) + "x" +
                                             std::to_string(set.num_heads) + " layers x heads, expected " +
                                             std::to_string(layers) + "x" + std::to_string(heads));
    per.push_back(utterance_skewness(set, est));
  }
  return reduce_skewness(per, layers, heads);
}

/// (S_m - S_p) / S_m.
inline double relative_drop(double s_reference, double s_candidate) {
  if (s_reference == 0.0) fail(ErrorCode::InvalidArgument, "relative drop undefined for zero reference");
  return (s_reference - s_candidate) / s_reference;
}

}  // namespace pmct
