#pragma once

#include <cstddef>
#include <functional>

namespace magarray {

/// Worker cap used by all parallel loops; 0 means hardware concurrency.
/// Results never depend on this value: every loop writes disjoint slots and
/// reductions happen afterwards in index order.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() workers, in
/// contiguous chunks. The first exception thrown is rethrown on the caller.
/// A parallel_for issued from inside another one runs serially.
/// `max_workers` > 0 lowers the cap for this loop only.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned max_workers = 0);

}  // namespace magarray
