#pragma once

// Chunked parallel loop. Work is split into fixed chunks whose results the
// caller reduces in chunk order, so the arithmetic never depends on how
// many workers ran or which worker took which chunk.

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace mdrf {

/// MDRF_THREADS if set to a positive integer, otherwise the hardware count.
inline std::size_t configured_threads() {
  if (const char* env = std::getenv("MDRF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls f(chunk, worker) for every chunk in [0, n_chunks). The exception of
/// the lowest-numbered failing chunk is rethrown.
template <class F>
void parallel_chunks(std::size_t n_chunks, std::size_t threads, F&& f) {
  if (n_chunks == 0) return;
  threads = std::max<std::size_t>(1, std::min(threads, n_chunks));
  std::vector<std::exception_ptr> errors(n_chunks);
  std::atomic<std::size_t> next{0};
  auto work = [&](std::size_t worker) {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        f(c, worker);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mdrf
