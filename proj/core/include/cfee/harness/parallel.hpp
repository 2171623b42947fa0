#ifndef CFEE_HARNESS_PARALLEL_HPP_
#define CFEE_HARNESS_PARALLEL_HPP_

#include <functional>

namespace cfee::harness {

/// Hardware concurrency capped by the CF_EE_THREADS environment variable.
int worker_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once; callers write results into slot i, so output is
/// independent of scheduling. The first exception is rethrown.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

}  // namespace cfee::harness

#endif  // CFEE_HARNESS_PARALLEL_HPP_
