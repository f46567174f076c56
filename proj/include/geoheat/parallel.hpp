#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace geoheat {

/// Worker count used by parallel loops. Thread count changes speed only:
/// work is split into chunks whose layout depends only on the problem size,
/// and no reduction crosses a chunk boundary.
inline int& worker_thread_count() {
  static int n = static_cast<int>(
      std::max(1u, std::min(8u, std::thread::hardware_concurrency())));
  return n;
}

inline void set_worker_threads(int n) { worker_thread_count() = n < 1 ? 1 : n; }

/// Runs body(begin, end) over disjoint chunks of [0, n). Chunk boundaries are
/// a function of n alone.
inline void parallel_for(size_t n,
                         const std::function<void(size_t, size_t)>& body) {
  if (n == 0) return;
  const size_t chunk = std::max<size_t>(16, (n + 255) / 256);
  const size_t num_chunks = (n + chunk - 1) / chunk;
  const int workers =
      static_cast<int>(std::min<size_t>(size_t(worker_thread_count()), num_chunks));
  if (workers <= 1) {
    for (size_t c = 0; c < num_chunks; ++c)
      body(c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t c = next.fetch_add(1);
        if (c >= num_chunks) return;
        try {
          body(c * chunk, std::min(n, (c + 1) * chunk));
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace geoheat
