#pragma once

namespace dgb {

/// Caps worker parallelism for all kernels (no-op without OpenMP).
void set_threads(int n);
int thread_count();

}  // namespace dgb
