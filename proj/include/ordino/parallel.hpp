#pragma once

#include <cstddef>
#include <functional>

namespace ordino {

// Worker cap: ORDINO_THREADS when set and positive, otherwise the hardware
// concurrency (at least 1).
int default_worker_count();
// An explicit request (> 0) capped by ORDINO_THREADS when that is set;
// otherwise default_worker_count().
int resolve_workers(int requested);

// Runs body(i) for i in [0, n) on up to `workers` threads. Work items are
// claimed dynamically, so callers must write results into per-index slots and
// reduce them in index order afterwards. If any body throws, the exception of
// the lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace ordino
