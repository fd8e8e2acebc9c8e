#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace lpstat {

//! Worker count: explicit request > LP_THREADS environment variable >
//! hardware concurrency. Always at least 1.
inline unsigned resolve_threads(int requested = 0)
{
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("LP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

//! Runs fn(i) for i in [0, count) over a fixed block partition. The
//! partition depends only on count and thread count, so per-index work
//! (e.g. seeded simulation) is reproducible. Exceptions propagate to the
//! caller; the first one thrown (lowest block) wins.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
  if (count == 0) return;
  if (threads <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(threads, count));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace lpstat
