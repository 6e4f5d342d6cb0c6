#pragma once

#include <cstddef>
#include <functional>

namespace threshlasso {

/// Resolves a thread count: positive values pass through, otherwise the
/// THRESHLASSO_THREADS environment variable, otherwise hardware concurrency.
int resolve_threads(int requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace threshlasso
