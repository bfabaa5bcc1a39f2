#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mfgc {

// Thread cap: MFGC_THREADS if set, hardware concurrency otherwise.
inline unsigned max_threads() {
  if (const char* env = std::getenv("MFGC_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(0..n-1); tasks must write disjoint slots so results stay
// deterministic regardless of the thread count.
template <typename Fn>
inline void parallel_for(int n, Fn&& fn) {
  unsigned threads = std::min<unsigned>(max_threads(), static_cast<unsigned>(n > 0 ? n : 1));
  if (n <= 1 || threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr err;
  std::mutex err_mutex;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (int i = static_cast<int>(t); i < n; i += static_cast<int>(threads)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace mfgc
