#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace wmforge {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items are
// claimed dynamically; callers write results by index so output order never
// depends on scheduling. If any item throws, the exception of the lowest
// failing index is rethrown after all threads finish.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (failed)
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
}

}  // namespace wmforge
