#pragma once

#include <cstddef>
#include <functional>

namespace polyglot {

// Worker cap: POLYGLOT_ID_WORKERS if set, otherwise hardware concurrency
// clamped to 4. Always >= 1.
int worker_count();

// Runs fn(i) for i in [0, n), split across up to `workers` threads in
// contiguous chunks. Callers get determinism by writing to index i only.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace polyglot
