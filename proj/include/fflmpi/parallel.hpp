#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fflmpi {

/// Number of worker threads used when a caller passes jobs <= 0.
inline int default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs body(i) for i in [0, n) on up to `jobs` threads in contiguous
/// blocks. body must only write to state owned by index i.
template <typename Body>
void parallel_for(std::ptrdiff_t n, Body&& body, int jobs = 0) {
  if (jobs <= 0) jobs = default_jobs();
  const std::ptrdiff_t workers = std::min<std::ptrdiff_t>(jobs, n);
  if (workers <= 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::ptrdiff_t block = (n + workers - 1) / workers;
  for (std::ptrdiff_t w = 0; w < workers; ++w) {
    const std::ptrdiff_t lo = w * block;
    const std::ptrdiff_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::ptrdiff_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fflmpi
