#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace nvmem {

// Worker count: NVMEM_THREADS caps it, hardware concurrency is the default.
inline unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("NVMEM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v < 1024) n = static_cast<unsigned>(v);
  }
  return n;
}

// Run fn(i) for i in [0, n); results must be written into per-index slots by
// the caller so the reduction order stays deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace nvmem
