#pragma once

// Thin layer over OpenMP so the kernels compile (serially) without it.

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sstex {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

/// Runs f(i) for i in [0, n). Each index must write only its own output slot;
/// results are then independent of the thread count. If any call throws, the
/// exception of the lowest failing index is rethrown after the loop.
template <typename F>
void parallel_for(std::ptrdiff_t n, F&& f) {
  if (n <= 0) return;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Serial counterpart with the same contract, kept as the reference path.
template <typename F>
void serial_for(std::ptrdiff_t n, F&& f) {
  for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
}

}  // namespace sstex
