#pragma once

#include <cstdlib>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace lowlight {

/// Keeps large image buffers on the heap between steps instead of returning
/// them to the OS, which avoids repeated page faults in the optimizer loop.
inline void configure_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace lowlight
