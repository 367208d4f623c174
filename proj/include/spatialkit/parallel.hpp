#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spatialkit {

/// Worker count from SPATIALKIT_THREADS, else the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("SPATIALKIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into fixed-size chunks and runs `body(begin, end)` for each
/// on up to `threads` workers. Returns one result per chunk, in chunk order,
/// so a caller that concatenates them gets the same bytes at any thread count.
template <typename Result, typename Body>
std::vector<Result> parallel_chunks(std::size_t n, std::size_t chunk, unsigned threads, Body body) {
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<Result> out(chunks);
  if (chunks == 0) return out;

  threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) out[c] = body(c * chunk, std::min(n, (c + 1) * chunk));
    return out;
  }

  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      std::size_t c;
      {
        std::lock_guard lock(mu);
        if (next >= chunks || error) return;
        c = next++;
      }
      try {
        out[c] = body(c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace spatialkit
