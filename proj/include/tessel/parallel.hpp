#pragma once

#include <tessel/core.hpp>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace tessel {

/// Worker count: TESSEL_THREADS when set to a positive integer, else the
/// hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("TESSEL_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) over contiguous static blocks. Each index is
/// written by exactly one worker, so results do not depend on the thread count.
template <typename Body>
void parallel_for(Index n, Body&& body, Index min_block = 64) {
  const Index workers =
      std::min<Index>(thread_count(), std::max<Index>(1, n / std::max<Index>(1, min_block)));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const Index end = std::min(n, (w + 1) * chunk);
        for (Index i = w * chunk; i < end; ++i) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace tessel
