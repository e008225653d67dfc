// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#include "pilotplan/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace pilotplan {

void parallel_for_chunks(std::int64_t count, int workers,
                         const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (count <= 0) return;
  int n = workers > 0 ? workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  n = static_cast<int>(std::min<std::int64_t>(n, count));
  if (n == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n);
  const std::int64_t chunk = (count + n - 1) / n;
  for (int w = 0; w < n; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min<std::int64_t>(lo + chunk, count);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace pilotplan
