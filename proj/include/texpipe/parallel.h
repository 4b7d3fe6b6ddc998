#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace texpipe {

// Splits [0, count) into contiguous chunks, one per thread. Safe only for
// loops whose iterations write disjoint locations; results are then
// independent of the thread count.
template <typename Fn>
void parallel_for(size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (size_t i = 0; i < count; i++) fn(i);
    return;
  }
  size_t workers = std::min((size_t)threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; w++) {
    size_t begin = count * w / workers;
    size_t end = count * (w + 1) / workers;
    pool.emplace_back([begin, end, &fn] {
      for (size_t i = begin; i < end; i++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace texpipe
