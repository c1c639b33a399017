#pragma once

#include <functional>

namespace vtn {

// Global worker count for the per-pixel kernels. Results are identical for
// any setting: kernels only parallelize independent writes, and reductions
// always combine per-row partials in row order.
void set_num_threads(int n);
int num_threads();

// Runs fn(begin, end) over a partition of [0, count) on the configured
// number of workers. Blocks until done; rethrows the first exception.
void parallel_blocks(int count, const std::function<void(int, int)>& fn);

}  // namespace vtn
