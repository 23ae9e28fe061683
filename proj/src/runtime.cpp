#include "gancomm/runtime.hpp"

#include <cstdlib>  // defines __GLIBC__

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace gancomm {

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);  // glibc rejects anything above 32 MB
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

}  // namespace gancomm
