// Minimal chunked thread pool helper for embarrassingly parallel loops over
// row/mode indices. Workers write to disjoint index ranges, so results are
// bitwise independent of the thread count.

#ifndef CNS_PARALLEL_HPP
#define CNS_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace cns {

inline int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/** Runs fn(i) for i in [0, n), split into contiguous chunks across threads.
 * fn must only touch state owned by index i. Rethrows the first exception. */
template <class Fn>
void parallel_for(int n, Fn&& fn, int nthreads = 0) {
  if (n <= 0) return;
  if (nthreads <= 0) nthreads = hardware_threads();
  nthreads = std::min(nthreads, n);
  if (nthreads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(nthreads);
  const int chunk = (n + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, t] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace cns

#endif  // CNS_PARALLEL_HPP
