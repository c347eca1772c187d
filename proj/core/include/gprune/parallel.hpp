#pragma once

#include <cstddef>
#include <functional>

namespace gprune {

/// Worker count used by parallel loops: GPRUNE_THREADS if set and positive,
/// otherwise the hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs body(i) for every i in [0, n) on up to `threads` workers. Each index
/// is visited exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace gprune
