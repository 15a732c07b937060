#pragma once

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rbsde {

/// Applies the RBSDE_LAB_THREADS cap to OpenMP when the variable is set to a
/// positive integer.  Returns the cap, or 0 when nothing was changed (unset
/// variable, malformed value, serial build).  All parallel kernels write
/// disjoint slots, so results are identical for every thread count; the cap
/// only bounds resource use.
inline int apply_thread_cap() {
    if (const char* env = std::getenv("RBSDE_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
#ifdef _OPENMP
            omp_set_num_threads(n);
#endif
            return n;
        }
    }
    return 0;
}

}  // namespace rbsde
