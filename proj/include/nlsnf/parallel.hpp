#pragma once

// Deterministic work sharing.  Items are independent (each writes its own
// output slot), so the reduction order inside an item never depends on the
// worker count and results are bit-identical for any number of jobs.

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nlsnf {

inline int effective_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <class F>
void parallel_for(std::size_t count, int jobs, F&& fn) {
  const int workers = effective_jobs(jobs);
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto body = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) break;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = static_cast<std::size_t>(workers) < count
                                    ? static_cast<std::size_t>(workers)
                                    : count;
  pool.reserve(n_threads);
  for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(body);
  for (std::thread& th : pool) th.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace nlsnf
