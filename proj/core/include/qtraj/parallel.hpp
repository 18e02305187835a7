#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qtraj {

// Trajectories are grouped into fixed-size blocks whose boundaries do not
// depend on the worker count. Each block produces one partial result; the
// caller merges the partials in block order, which makes the floating-point
// result independent of scheduling.
inline constexpr std::size_t kTrajectoryBlock = 64;

unsigned default_worker_count();

// Runs body(block_index, begin, end) for every block of [0, n_items) on up to
// n_workers threads and returns the per-block results in block order.
template <class Result, class Body>
std::vector<Result> run_blocks(std::size_t n_items, unsigned n_workers, Body body,
                               std::size_t block_size = kTrajectoryBlock) {
  const std::size_t n_blocks = (n_items + block_size - 1) / block_size;
  std::vector<Result> results(n_blocks);
  if (n_blocks == 0) return results;

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(n_items, begin + block_size);
        results[b] = body(b, begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_blocks);
        return;
      }
    }
  };

  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, n_workers), n_blocks));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace qtraj
