#pragma once

// Data-parallel loop over [0, n) with results that do not depend on the
// worker count: callers write into pre-sized slots indexed by i, and when
// several iterations throw, the exception of the lowest index wins.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace automeco {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  struct Failure {
    std::size_t index = 0;
    std::exception_ptr error;
  };
  std::vector<Failure> failures(jobs);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      // Strided assignment; a worker stops at its first failure.
      for (std::size_t i = w; i < n; i += jobs) {
        try {
          fn(i);
        } catch (...) {
          failures[w] = {i, std::current_exception()};
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  const Failure* first = nullptr;
  for (const auto& f : failures) {
    if (f.error && (first == nullptr || f.index < first->index)) first = &f;
  }
  if (first != nullptr) std::rethrow_exception(first->error);
}

}  // namespace automeco
