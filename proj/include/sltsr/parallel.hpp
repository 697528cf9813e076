#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace sltsr {

/// Splits [begin, end) into `threads` contiguous chunks and runs
/// `fn(chunk_begin, chunk_end)` on each. Chunks own disjoint outputs, so the
/// result never depends on the thread count. The first exception thrown by
/// any worker is rethrown on the caller.
template <typename Fn>
void parallel_for(int begin, int end, int threads, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  threads = std::clamp(threads, 1, n);
  if (threads == 1) {
    fn(begin, end);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const int b = begin + static_cast<int>(static_cast<long long>(n) * t / threads);
    const int e = begin + static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
    pool.emplace_back([&, t, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace sltsr
