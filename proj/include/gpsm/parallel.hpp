#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gpsm {

// Worker count: GPSM_THREADS environment variable, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("GPSM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, n).  Each index is handled by exactly one worker
// and workers share no accumulation state, so per-index results cannot
// depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = 0) {
  if (threads <= 0) threads = thread_count();
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const std::size_t workers = std::min<std::size_t>(threads, n);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gpsm
