#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace relight {

/// Worker count used by the per-pixel kernels. Zero selects the hardware concurrency.
struct ExecOptions {
  int workers = 0;

  int resolved_workers() const {
    if (workers > 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

/// Runs fn(begin, end) over [0, count) split into contiguous chunks, one per worker.
/// Chunks write disjoint outputs, so results do not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t count, const ExecOptions& exec, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(exec.resolved_workers()), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

}  // namespace relight
