#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cnisp {

// Process-wide worker count used by parallel_for; 0 means hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs f(i) for i in [0, n). Work is handed out by an atomic counter; if any
// call throws, the exception from the smallest failing index is rethrown.
template <class F>
void parallel_for(std::ptrdiff_t n, F&& f) {
  const int workers = static_cast<int>(std::min<std::ptrdiff_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::ptrdiff_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  std::atomic<bool> failed{false};
  auto body = [&]() {
    for (;;) {
      const std::ptrdiff_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        f(i);
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers - 1));
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cnisp
