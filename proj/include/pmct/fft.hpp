// pmct/fft.hpp

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

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>

#include "pmct/error.hpp"

namespace pmct {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

using RealArray = std::unique_ptr<double[], FftwFree>;
using ComplexArray = std::unique_ptr<fftw_complex[], FftwFree>;

inline RealArray alloc_real(std::size_t n) {
  auto* p = fftw_alloc_real(n);
  if (!p) throw std::bad_alloc();
  return RealArray(p);
}

inline ComplexArray alloc_complex(std::size_t n) {
  auto* p = fftw_alloc_complex(n);
  if (!p) throw std::bad_alloc();
  return ComplexArray(p);
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// The FFTW planner is not thread-safe; executing an existing plan on new
// arrays is. Plans are created once per size under a lock and live for the
// rest of the process. FFTW_ESTIMATE keeps planning deterministic, and all
// work arrays come from fftw_malloc so every execution sees the same
// alignment and therefore the same codelets.
inline const PlanPair& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  RealArray r = alloc_real(n);
  ComplexArray c = alloc_complex(n / 2 + 1);
  const int size = static_cast<int>(n);
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(size, r.get(), c.get(), FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(size, c.get(), r.get(), FFTW_ESTIMATE);
  if (!p.forward || !p.inverse) fail(ErrorCode::InvalidArgument, "FFTW planning failed");
  return cache.emplace(n, p).first->second;
}

}  // namespace detail

/// Real-input FFT of a fixed power-of-two size with its own work buffers.
/// Instances are cheap and not shared between threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        plans_(&detail::plans_for(n)),
        time_(detail::alloc_real(n)),
        freq_(detail::alloc_complex(n / 2 + 1)) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t num_bins() const noexcept { return n_ / 2 + 1; }

  double* time() noexcept { return time_.get(); }
  std::complex<double>* freq() noexcept {
    return reinterpret_cast<std::complex<double>*>(freq_.get());
  }

  /// time() -> freq().
  void forward() { fftw_execute_dft_r2c(plans_->forward, time_.get(), freq_.get()); }

  /// freq() -> time(), unnormalized (scaled by n). Clobbers freq().
  void inverse() { fftw_execute_dft_c2r(plans_->inverse, freq_.get(), time_.get()); }

 private:
  std::size_t n_;
  const detail::PlanPair* plans_;
  detail::RealArray time_;
  detail::ComplexArray freq_;
};

}  // namespace pmct
