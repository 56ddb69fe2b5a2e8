#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gwdual {

/// Overrides the GWD_THREADS environment variable; 0 clears the override.
void set_thread_limit_override(int n);

/// Worker count: override if set, else GWD_THREADS, else hardware, in [1, 64].
int thread_limit();

/// Runs body(i) for i in [0, n). Results must be written to per-index slots;
/// workers pull indices from a shared counter, so outputs are deterministic
/// as long as body(i) is a pure function of i.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  const int threads = thread_limit();
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  pool.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace gwdual
