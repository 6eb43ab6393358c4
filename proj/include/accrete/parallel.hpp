#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace accrete {

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// threads. Bodies must write only to their own index range.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2 * static_cast<std::size_t>(threads)) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    pool.emplace_back([&body, begin, end = std::min(n, begin + chunk)] { body(begin, end); });
  }
}

}  // namespace accrete
