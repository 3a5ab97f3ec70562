#pragma once

#include <cstdint>
#include <functional>

namespace gpa {

// Worker-thread cap: the GPA_THREADS environment variable when it parses to
// a positive integer, otherwise the hardware concurrency (min 1).
int max_threads();

// Invokes fn(i) once for every i in [0, n). Indices are split into
// contiguous blocks across at most max_threads() threads; callers that
// write only to per-index slots therefore get results independent of the
// thread count. The first exception (lowest block) is rethrown after join.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace gpa
