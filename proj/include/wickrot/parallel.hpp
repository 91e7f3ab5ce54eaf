#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace wickrot {

inline int default_thread_count() {
  if (const char* env = std::getenv("WICKROT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

inline int& configured_threads() {
  static int value = default_thread_count();
  return value;
}

inline void set_thread_count(int n) { configured_threads() = n < 1 ? 1 : n; }

// Deterministic parallel map: body(i) must write only to slot i of some
// preallocated output, so results are independent of scheduling.
template <typename F>
void parallel_for(std::size_t count, F&& body, int threads = 0) {
  if (threads <= 0) threads = configured_threads();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(std::min<std::size_t>(threads, count));
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace wickrot
