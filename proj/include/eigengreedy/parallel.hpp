#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eigengreedy {

/// Worker count: explicit request, else EIGENGREEDY_THREADS, else hardware.
inline int thread_cap(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EIGENGREEDY_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = fn(i) for i < count, spread over up to `threads` workers.
/// Results keep index order; the first exception thrown is rethrown.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t count, Fn&& fn, int threads = 0) {
  std::vector<R> out(count);
  const int nt = static_cast<int>(std::min<std::size_t>(count, static_cast<std::size_t>(thread_cap(threads))));
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(m);
        if (!err) err = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace eigengreedy
