#pragma once

#include <cstddef>
#include <functional>

namespace hp43 {

/// Worker count: HP43_THREADS if set, else set_worker_count, else hardware concurrency.
int worker_count();
void set_worker_count(int n);

/// Runs body(i) for i in [0, n). Work items must write to disjoint outputs;
/// results are then independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hp43
