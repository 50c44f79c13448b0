#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace evonarx {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must be
// independent and write only to their own slot; the caller sees results in
// index order, so the thread count never changes observable output.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers =
      threads <= 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, w, workers, n] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace evonarx
