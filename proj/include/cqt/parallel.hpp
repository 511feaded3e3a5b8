#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace cqt {

/// Runs body(row) for row in [0, rows) on a small worker pool. Each row is
/// written by exactly one worker, so results land in deterministic places;
/// if rows throw, the exception from the lowest row is rethrown.
template <class Body>
void parallel_rows(int rows, Body&& body) {
  const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), static_cast<unsigned>(rows)));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(std::max(rows, 0)));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int row = next++; row < rows; row = next++) {
      try {
        body(row);
      } catch (...) {
        errors[static_cast<size_t>(row)] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cqt
