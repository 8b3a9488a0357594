#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rmdp {

/// Number of threads the parallel kernels use. Controlled by the
/// ROBUSTMDP_THREADS environment variable; unset or 0 means one thread
/// per hardware core.
int effective_threads();

/// Runs f(i) for i in [0, n). Iterations must be independent; each index
/// is computed by exactly one thread with the same per-index arithmetic
/// as the serial loop, so results are identical for any thread count.
template <class F>
void parallel_for(size_t n, F&& f) {
#ifdef _OPENMP
    const int threads = effective_threads();
    if (threads > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
        for (long i = 0; i < static_cast<long>(n); ++i) f(static_cast<size_t>(i));
        return;
    }
#endif
    for (size_t i = 0; i < n; ++i) f(i);
}

}  // namespace rmdp
