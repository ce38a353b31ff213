#pragma once

#include <cstddef>
#include <functional>

namespace mvsde {

int default_workers();

// Runs fn(begin, end) over contiguous index chunks, one chunk per worker.
// Each index must be processed independently (own output slot), so results
// cannot depend on the worker count. Exceptions from workers are rethrown
// in deterministic chunk order.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace mvsde
