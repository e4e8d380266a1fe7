#pragma once

#include <cstddef>
#include <functional>

namespace kplane {

/// Worker count: KPLANE_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Calls
/// made from inside a worker run serially. The exception of the lowest failing
/// index is rethrown after all workers join. Callers write results into
/// index-addressed slots, so outputs never depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace kplane
