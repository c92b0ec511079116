#include "bevlift/parallel.hpp"

#include <atomic>

namespace bevlift {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = unset, use hardware concurrency
}

int max_threads() {
  int n = g_max_threads.load(std::memory_order_relaxed);
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_max_threads(int n) {
  // n < 1 resets to the hardware default.
  g_max_threads.store(n < 1 ? 0 : n, std::memory_order_relaxed);
}

}  // namespace bevlift
