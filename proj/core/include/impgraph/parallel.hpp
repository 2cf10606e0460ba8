#pragma once

#include <cstddef>
#include <functional>

namespace impgraph {

/// Worker count from IMPGRAPH_THREADS, defaulting to 1.
int threads_from_env();

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
/// handled exactly once; callers write results into per-index slots and
/// reduce afterwards in index order.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace impgraph
