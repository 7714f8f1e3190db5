#pragma once

#include <exception>

#include <em/types.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace em {

// Runtime switch so the OpenMP and serial paths can be compared on one build.
// Results must be identical either way: every parallel loop writes disjoint
// slots and reductions are order-independent (max/disjoint writes only).
bool parallel_enabled();
void set_parallel_enabled(bool on);
int  hardware_threads();

// Exceptions thrown by the body are captured inside the parallel region and
// rethrown on the calling thread (first one wins).
template <class F>
void parallel_for(Index n, F&& body) {
#ifdef _OPENMP
    if (parallel_enabled() && n > 1) {
        std::exception_ptr err;
        #pragma omp parallel for schedule(static)
        for (Index i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                #pragma omp critical(em_parallel_for_err)
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
        return;
    }
#endif
    for (Index i = 0; i < n; ++i) body(i);
}

} // namespace em
