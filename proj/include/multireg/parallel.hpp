#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace multireg {

/// Worker count: MULTIREG_THREADS if set (>=1), else hardware concurrency.
/// Only throughput may depend on this value, never results.
inline int effective_thread_count() {
  if (const char* env = std::getenv("MULTIREG_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(begin, end) over a partition of [0, n) into contiguous chunks.
/// Chunk boundaries depend only on n and the worker count; callers must keep
/// per-index work independent so results are identical for any thread count.
inline void parallel_chunks(std::size_t n,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(effective_thread_count()), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (auto& t : pool) t.join();
}

}  // namespace multireg
