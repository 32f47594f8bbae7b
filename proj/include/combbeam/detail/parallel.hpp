#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace combbeam::detail {

/// Worker count: hardware concurrency, capped by COMBBEAM_THREADS when set.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COMBBEAM_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (...) {
      // ignore malformed values
    }
  }
  return n;
}

/// Calls fn(begin, end) over disjoint chunks of [0, count). Each index is
/// visited exactly once, so results do not depend on the worker count. The
/// first exception thrown by any chunk is rethrown once all workers joined.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t min_chunk = 256) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), (count + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(count, b + chunk);
      if (b >= e) break;
      pool.emplace_back([&fn, &errors, w, b, e] {
        try {
          fn(b, e);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    try {
      fn(std::size_t{0}, std::min(count, chunk));
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace combbeam::detail
