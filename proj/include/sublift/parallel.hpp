#pragma once

namespace sublift {

// OpenMP sweep over [0, n). Bodies touch only their own index, so the result
// does not depend on the thread count and matches serial_for bitwise.
template <class F>
inline void parallel_for(int n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) body(i);
}

template <class F>
inline void serial_for(int n, F&& body) {
  for (int i = 0; i < n; ++i) body(i);
}

}  // namespace sublift
