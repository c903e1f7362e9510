#pragma once

namespace svwa {

/// Keeps large freed blocks in the process heap instead of returning them to
/// the OS. Every training and adaptation step allocates activations of the
/// same sizes, and with glibc's defaults each of them costs an mmap/munmap
/// pair plus page faults. No-op on other C libraries. Call once at startup.
void tune_allocator() noexcept;

}  // namespace svwa
