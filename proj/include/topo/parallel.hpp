// parallel.hpp
//
// Deterministic per-index parallelism: the index set is split into
// contiguous chunks, one thread each, and callers write results into
// disjoint preallocated slots. Reductions stay in index order on the
// calling thread, so results do not depend on the job count.

#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace topo {

template <typename F>
void parallel_for(int n, int jobs, F&& body) {
  if (n <= 0) return;
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(jobs);
  const int chunk = (n + jobs - 1) / jobs;
  for (int t = 0; t < jobs; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    threads.emplace_back([&body, &errors, t, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace topo
