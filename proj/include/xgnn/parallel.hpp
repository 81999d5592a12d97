#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace xgnn {

// Worker cap: hardware concurrency, lowered by XGNN_THREADS.
inline int worker_count() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("XGNN_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (...) {
    }
  }
  return n;
}

// Static partition of [0, n) into contiguous chunks. Each chunk writes only
// its own outputs, so results do not depend on the worker count.
template <class F>
void parallel_for(int n, F&& fn, int min_chunk = 64) {
  const int workers = std::min(worker_count(), std::max(1, n / std::max(1, min_chunk)));
  if (workers <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int b = w * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace xgnn
