#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace repulse::par {

// Worker count resolution: REPULSE_BBM_THREADS wins over the requested value;
// 0 means "hardware concurrency".
inline int resolve_workers(int requested) {
  if (const char* env = std::getenv("REPULSE_BBM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Work is handed out in fixed-size blocks via an
// atomic cursor, so the assignment of items to blocks never depends on the
// worker count; callers that write results into slot i of a preallocated
// array therefore get byte-identical output for any number of threads.
inline void for_each_index(std::size_t n, int workers,
                           const std::function<void(std::size_t)>& fn,
                           std::size_t block = 256) {
  workers = resolve_workers(workers);
  if (workers <= 1 || n < 2 * block) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex mu;
  auto run = [&]() {
    for (;;) {
      const std::size_t lo = cursor.fetch_add(block);
      if (lo >= n || failed.load()) break;
      const std::size_t hi = lo + block < n ? lo + block : n;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(mu);
        if (!failed.exchange(true)) err = std::current_exception();
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failed.load() && err) std::rethrow_exception(err);
}

}  // namespace repulse::par
