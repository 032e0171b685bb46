#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace osc {

// Worker count: explicit value, else the OSC_WORKERS environment variable,
// else the hardware concurrency (capped).
inline int resolve_workers(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OSC_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; callers
// write results into per-index slots so the outcome is independent of the
// schedule.
inline void parallel_for(std::int64_t n, int workers,
                         const std::function<void(std::int64_t)>& fn) {
  workers = resolve_workers(workers);
  if (workers <= 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto w = static_cast<std::int64_t>(std::min<std::int64_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::int64_t k = 0; k < w; ++k) {
    const std::int64_t lo = n * k / w;
    const std::int64_t hi = n * (k + 1) / w;
    pool.emplace_back([lo, hi, &fn, &first_error, &error_mutex] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace osc
