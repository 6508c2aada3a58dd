#pragma once

#include <cstddef>
#include <functional>

namespace triage::util {

// Worker count: TRIAGE_THREADS when set and positive, otherwise the hardware
// concurrency (at least 1).
std::size_t thread_count();

// Runs body(i) for i in [0, n). Iterations are distributed dynamically; the
// first exception thrown by any iteration is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = thread_count());

} // namespace triage::util
