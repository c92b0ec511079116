#pragma once

#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace bevlift {

// Global worker count for parallel_for. Defaults to hardware concurrency.
int max_threads();
void set_max_threads(int n);

// Static partition of [0, n) across workers. Each index must write only its
// own outputs; under that contract results are identical for any thread
// count. fn is invoked as fn(i).
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const int nt = max_threads();
  if (n == 0) return;
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Fixed-tree pairwise summation: the reduction order depends only on n, so
// results are reproducible bit for bit regardless of threading.
template <typename F>
double pairwise_sum(std::size_t n, F&& term) {
  struct Rec {
    static double sum(std::size_t lo, std::size_t hi, F& f) {
      if (hi - lo <= 16) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
      }
      const std::size_t mid = lo + (hi - lo) / 2;
      return sum(lo, mid, f) + sum(mid, hi, f);
    }
  };
  if (n == 0) return 0.0;
  return Rec::sum(0, n, term);
}

inline double pairwise_sum(std::span<const double> v) {
  return pairwise_sum(v.size(), [&](std::size_t i) { return v[i]; });
}

}  // namespace bevlift
