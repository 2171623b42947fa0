#include "cfee/harness/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cfee::harness {

int worker_count() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("CF_EE_THREADS")) {
    try {
      const int v = std::stoi(cap);
      if (v >= 1) n = std::min(n, v);
    } catch (const std::exception&) {
      // unparsable cap: keep the hardware count
    }
  }
  return n;
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  const int workers =
      static_cast<int>(std::max(1L, std::min<long>(threads, n)));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto run = [&] {
    for (long i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cfee::harness
