#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace twinbeam {

/// Worker count: TWINBEAM_WORKERS env var when set, hardware concurrency
/// otherwise.
inline unsigned worker_count() {
  if (const char* env = std::getenv("TWINBEAM_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Runs fn(begin, end, worker) over [0, n) split into one contiguous chunk
/// per worker. Results must be written by index (or into per-worker
/// accumulators) so the decomposition cannot affect the outcome.
inline void parallel_chunks(
    std::size_t n, unsigned workers,
    const std::function<void(std::size_t, std::size_t, unsigned)>& fn) {
  if (workers == 0) workers = worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1 || n == 0) {
    fn(0, n, 0);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = std::min(n, static_cast<std::size_t>(w) * chunk);
    const std::size_t e = std::min(n, b + chunk);
    pool.emplace_back([&fn, b, e, w] { fn(b, e, w); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace twinbeam
