#pragma once

namespace gancomm {

/// Keeps large tensor buffers on the heap between training steps instead of
/// returning them to the OS (glibc only; a no-op elsewhere). Call once at
/// program start.
void tune_allocator();

}  // namespace gancomm
