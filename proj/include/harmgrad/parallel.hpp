#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace harmgrad {

/// Worker count used by the grid scans; 0 means hardware concurrency.
inline std::atomic<unsigned>& default_jobs() {
  static std::atomic<unsigned> jobs{0};
  return jobs;
}

inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs == 0) jobs = default_jobs().load();
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  return jobs;
}

/// Runs fn(i) for i in [0, n). Each index is visited exactly once, so writes
/// into per-index output slots need no synchronization and results do not
/// depend on the worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned jobs = 0) {
  jobs = std::min<std::size_t>(resolve_jobs(jobs), std::max<std::size_t>(n, 1));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    constexpr std::size_t kChunk = 64;
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + kChunk);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs - 1);
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace harmgrad
