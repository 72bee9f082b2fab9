#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace glick {

/// Worker cap: GLKF_THREADS if set, otherwise machine parallelism.
inline unsigned thread_budget() {
  static unsigned cached = [] {
    if (const char* env = std::getenv("GLKF_THREADS")) {
      long v = std::strtol(env, nullptr, 10);
      if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
  }();
  return cached;
}

/// Splits [0, n) into at most thread_budget() contiguous chunks and runs
/// fn(slot, lo, hi) on each. Slot indices are stable, so per-slot buffers
/// reduced in slot order give a fixed floating-point summation order.
inline void parallel_chunks(
    std::size_t n,
    const std::function<void(std::size_t slot, std::size_t lo, std::size_t hi)>&
        fn) {
  if (n == 0) return;
  const std::size_t slots =
      std::min<std::size_t>(thread_budget(), n);
  if (slots == 1) {
    fn(0, 0, n);
    return;
  }
  const std::size_t base = n / slots, extra = n % slots;
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(slots);
  std::size_t lo = 0;
  for (std::size_t s = 0; s < slots; ++s) {
    const std::size_t hi = lo + base + (s < extra ? 1 : 0);
    workers.emplace_back([&fn, &errors, s, lo, hi] {
      try {
        fn(s, lo, hi);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
    lo = hi;
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace glick
