#pragma once

#include <cstddef>
#include <functional>

namespace dyndet {

/// Worker cap for parallel loops; 0 selects the hardware concurrency.
void set_thread_count(int threads);
int thread_count();

/// Calls fn(i) for i in [0, n). Each index is visited exactly once; callers write
/// into disjoint slots so the result does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dyndet
