#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace risim {

inline unsigned thread_budget() {
  if (const char* env = std::getenv("INTERLACE_SLT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Chunked parallel map-reduce over [0, n). Chunk boundaries depend only on
// `grain`, and chunk results are reduced in chunk order, so the reduction is
// byte-identical for any thread count.
template <typename Result, typename ChunkFn, typename MergeFn>
Result parallel_chunked(std::size_t n, std::size_t grain, const ChunkFn& chunk_fn,
                        const MergeFn& merge_fn, Result init = Result{}) {
  if (n == 0) return init;
  if (grain == 0) grain = 1;
  const std::size_t n_chunks = (n + grain - 1) / grain;
  std::vector<Result> results(n_chunks);
  const unsigned threads = std::min<std::size_t>(thread_budget(), n_chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c)
      results[c] = chunk_fn(c * grain, std::min(n, (c + 1) * grain));
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        results[c] = chunk_fn(c * grain, std::min(n, (c + 1) * grain));
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  Result acc = init;
  for (std::size_t c = 0; c < n_chunks; ++c) acc = merge_fn(std::move(acc), std::move(results[c]));
  return acc;
}

// Run independent jobs (no result), work-stealing order; only valid when jobs
// write to disjoint slots.
inline void parallel_jobs(std::size_t n, const std::function<void(std::size_t)>& job) {
  const unsigned threads = std::min<std::size_t>(thread_budget(), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      job(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace risim
