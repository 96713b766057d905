#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "egf/grid.hpp"

namespace egf::detail {

// FFTW planning is not thread-safe; execution through the new-array
// interface is. Plans are cached per (shape, direction) for the process
// lifetime.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan get(int n0, int n1, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n0, n1, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n0) * n1);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = n1 == 1 ? fftw_plan_dft_1d(n0, buf, buf, sign, flags)
                             : fftw_plan_dft_2d(n0, n1, buf, buf, sign, flags);
    plans_.emplace(key, plan);
    return plan;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

/// In-place unnormalised DFT over the grid shape; sign = FFTW_FORWARD or
/// FFTW_BACKWARD.
inline void fft_inplace(const PeriodicGrid& grid, std::vector<std::complex<double>>& data,
                        int sign) {
  fftw_plan plan = FftPlanCache::instance().get(grid.points(0), grid.points(1), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace egf::detail
