#include "wavecomp/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>

namespace wavecomp {

namespace {

int env_threads() {
  static const int value = [] {
    const char* env = std::getenv("WAVECOMP_THREADS");
    int n = 0;
    if (env != nullptr) {
      auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
      if (ec != std::errc{} || n < 1) n = 0;
    }
    return n > 0 ? n : omp_get_max_threads();
  }();
  return value;
}

std::atomic<int> g_override{0};

}  // namespace

int worker_threads() {
  const int o = g_override.load(std::memory_order_relaxed);
  return o > 0 ? o : env_threads();
}

void set_worker_threads(int n) { g_override.store(n > 0 ? n : 0, std::memory_order_relaxed); }

}  // namespace wavecomp
