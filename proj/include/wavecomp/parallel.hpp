#pragma once

namespace wavecomp {

// Worker count for OpenMP regions in the codec and corpus builder.
// Reads WAVECOMP_THREADS once; falls back to the OpenMP default.
int worker_threads();

// Overrides the worker count for the rest of the process (tests use this to
// check thread-count independence). n < 1 restores the environment default.
void set_worker_threads(int n);

}  // namespace wavecomp
