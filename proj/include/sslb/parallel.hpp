#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sslb {

// Deterministic block runner. Work is pre-cut into blocks whose boundaries
// never depend on the worker count; workers claim blocks from an atomic
// counter. Callers write per-block (or per-worker) partials and combine
// them afterwards in ascending block order, so the final numbers are
// bit-identical for any worker count.
//
// fn(block_index, worker_id) with worker_id in [0, workers).
template <typename Fn>
void run_blocks(std::size_t nblocks, unsigned workers, Fn&& fn) {
  if (nblocks == 0) return;
  if (workers <= 1 || nblocks == 1) {
    for (std::size_t b = 0; b < nblocks; ++b) fn(b, 0u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;

  auto worker_loop = [&](unsigned id) {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= nblocks) return;
      try {
        fn(b, id);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  unsigned n = workers;
  if (static_cast<std::size_t>(n) > nblocks) n = static_cast<unsigned>(nblocks);
  std::vector<std::thread> pool;
  pool.reserve(n - 1);
  for (unsigned id = 1; id < n; ++id) pool.emplace_back(worker_loop, id);
  worker_loop(0);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sslb
