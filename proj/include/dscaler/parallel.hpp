#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dscaler {

/// Number of worker threads for `jobs` (<= 0 means all hardware threads).
inline int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on up to `jobs` threads.  Work items are
/// claimed in contiguous blocks; the first exception is rethrown.
template <typename Fn>
void parallel_for(Eigen::Index count, int jobs, Fn&& fn) {
  const int workers = static_cast<int>(std::min<Eigen::Index>(resolve_jobs(jobs), std::max<Eigen::Index>(count, 1)));
  if (workers <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  const Eigen::Index chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Eigen::Index begin = w * chunk;
    const Eigen::Index end = std::min(count, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (Eigen::Index i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Neumaier-compensated sum in index order.
inline double compensated_sum(const std::vector<double>& values) {
  double sum = 0.0, carry = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    carry += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

}  // namespace dscaler
