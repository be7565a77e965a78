#pragma once

#include <cstddef>
#include <functional>

namespace pilotscat {

// Worker count: PILOTSCAT_THREADS if set to a positive integer, else the
// hardware concurrency (at least 1).
int thread_count();

// Calls fn(i) for i in [0, n) on up to thread_count() workers. Work is
// handed out by an atomic counter; callers write results by index, so the
// outcome does not depend on scheduling. The first exception thrown by any
// call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pilotscat
