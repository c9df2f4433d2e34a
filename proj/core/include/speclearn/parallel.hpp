#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace speclearn {

// Static block partition of [0, n) across up to `jobs` threads. Work items
// must not share mutable state; results keyed by index stay deterministic
// regardless of the thread count.
inline void parallel_for(int64_t n, int jobs, const std::function<void(int64_t)>& fn) {
  if (n <= 0) return;
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int64_t lo = w * chunk;
    const int64_t hi = std::min<int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace speclearn
