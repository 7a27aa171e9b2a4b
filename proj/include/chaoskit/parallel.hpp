#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace chaoskit {

inline unsigned effective_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs f(i) for i in [0, n). Each index is processed exactly once; callers
// must only write to per-index slots so that results are identical for any
// thread count. Reductions happen afterwards, serially, in index order.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  threads = effective_threads(threads);
  if (threads <= 1 || n < 2 * threads) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(n, t * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&f, begin, end] {
      for (std::size_t i = begin; i < end; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace chaoskit
