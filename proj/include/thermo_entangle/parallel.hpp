#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace thermo_entangle {

/// Worker count for internal pools. THERMO_ENTANGLE_THREADS caps it; 0 or
/// absence means auto (hardware concurrency). Always at least one.
inline int worker_count() {
  int limit = 0;
  if (const char* env = std::getenv("THERMO_ENTANGLE_THREADS")) {
    try {
      limit = std::stoi(env);
    } catch (...) {
      limit = 0;
    }
  }
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (limit <= 0) return hw;
  return limit < hw ? limit : hw;
}

/// Runs fn(i) for i in [begin, end) across the worker pool in contiguous
/// blocks. Results must be written to per-index slots; with that discipline
/// output is identical for any worker count, including one.
template <typename Fn>
void parallel_for(std::int64_t begin, std::int64_t end, Fn&& fn) {
  const std::int64_t count = end - begin;
  if (count <= 0) return;
  const int workers = worker_count();
  if (workers == 1 || count == 1) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
    return;
  }
  const int used = static_cast<int>(count < workers ? count : workers);
  const std::int64_t chunk = (count + used - 1) / used;
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (int w = 0; w < used; ++w) {
    const std::int64_t lo = begin + w * chunk;
    const std::int64_t hi = lo + chunk < end ? lo + chunk : end;
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace thermo_entangle
