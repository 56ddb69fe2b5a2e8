#include "gwdual/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

namespace gwdual {

namespace {
std::atomic<int> g_override{0};
}

void set_thread_limit_override(int n) { g_override.store(n < 0 ? 0 : n); }

int thread_limit() {
  int n = g_override.load();
  if (n == 0) {
    if (const char* env = std::getenv("GWD_THREADS")) {
      n = std::atoi(env);
    }
  }
  if (n == 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
  }
  return std::clamp(n, 1, 64);
}

}  // namespace gwdual
