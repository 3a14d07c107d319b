#pragma once

#include <cstddef>
#include <functional>

namespace viewfuse {

/// Upper bound on worker threads used by library operations. Defaults to
/// the hardware concurrency. Results never depend on this value.
void set_max_threads(int threads);
int max_threads();

/// Runs fn(i) for i in [0, n). Each index is processed exactly once; callers
/// write results to index-owned slots so output is order independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace viewfuse
