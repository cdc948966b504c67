#pragma once

// Thread fan-out with reproducible reductions. Work is split into chunks whose
// boundaries depend only on the problem size, never on the thread count, and
// partial results are merged in chunk order, so every reduction is bitwise
// identical for any number of threads.

#include <cstddef>
#include <functional>
#include <vector>

namespace mdecomp::parallel {

void set_threads(unsigned n);  // 0 means hardware concurrency
unsigned threads();

/// Calls task(i) for every i in [0, count). Tasks must touch disjoint state.
/// The first exception thrown by any task is rethrown after all workers join.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& task);

/// Sum of term(i) over [0, count) in chunks of `chunk` indices.
template <class Term>
double ordered_sum(std::size_t count, std::size_t chunk, Term&& term) {
  if (count == 0) return 0.0;
  const std::size_t nchunks = (count + chunk - 1) / chunk;
  std::vector<double> partial(nchunks, 0.0);
  for_each_index(nchunks, [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = begin + chunk < count ? begin + chunk : count;
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    partial[c] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace mdecomp::parallel
