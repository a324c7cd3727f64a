#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace lvi {

/// Recursive pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;  ///< sample standard deviation / sqrt(n)
  std::size_t n = 0;
};

/// Mean and standard error of i.i.d. samples (n >= 1; std_error = 0 when n == 1).
SampleSummary summarize(std::span<const double> samples);

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads` workers.
/// threads == 0 picks the hardware concurrency. The first exception thrown by a
/// worker is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace lvi
