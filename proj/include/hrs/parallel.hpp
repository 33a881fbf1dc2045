#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hrs {

// Process-wide worker count. Only affects speed: every parallel loop in the
// library partitions work into fixed chunks whose results are combined in
// chunk order.
unsigned worker_threads();
void set_worker_threads(unsigned n);

// Run body(chunk_begin, chunk_end) over [0, n) split into chunks of
// `chunk` items. Exceptions thrown by the body are rethrown on the caller.
template <class Body>
void parallel_chunks(std::size_t n, std::size_t chunk, Body&& body,
                     unsigned threads = worker_threads()) {
  if (n == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1u), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) {
        try {
          body(c * chunk, std::min(n, (c + 1) * chunk));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = worker_threads()) {
  parallel_chunks(
      n, 256,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) body(i);
      },
      threads);
}

// Deterministic reduction: partial(begin, end) -> T per fixed-size chunk,
// then folded left to right with combine.
template <class T, class Partial, class Combine>
T chunked_reduce(std::size_t n, std::size_t chunk, T init, Partial&& partial, Combine&& combine,
                 unsigned threads = worker_threads()) {
  if (n == 0) return init;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<T> parts(chunks, init);
  parallel_chunks(
      n, chunk, [&](std::size_t b, std::size_t e) { parts[b / chunk] = partial(b, e); }, threads);
  T total = init;
  for (auto& p : parts) total = combine(total, p);
  return total;
}

}  // namespace hrs
