#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <span>
#include <string>
#include <vector>

#include <omp.h>

namespace collide1d {

/// Worker count: COLLIDE1D_WORKERS if set, else `requested` if non-zero,
/// else the OpenMP default.
inline int resolve_workers(std::size_t requested = 0) {
  if (const char* env = std::getenv("COLLIDE1D_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  if (requested > 0) return static_cast<int>(requested);
  return omp_get_max_threads();
}

/// Runs trials first..first+count-1. `fill(trial, row)` writes `width`
/// values into row. Rows land at fixed offsets, so the result does not
/// depend on the number of workers. The first exception thrown by any
/// trial is rethrown after the loop.
template <class Fill>
std::vector<double> farm_trials(std::uint64_t first, std::uint64_t count, std::size_t width, Fill&& fill,
                                int workers) {
  std::vector<double> rows(count * width);
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long k = 0; k < n; ++k) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      fill(first + static_cast<std::uint64_t>(k),
           std::span<double>(rows.data() + static_cast<std::size_t>(k) * width, width));
    } catch (...) {
#pragma omp critical(collide1d_farm_failure)
      {
        if (!failure) failure = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

/// Single-threaded reference for farm_trials.
template <class Fill>
std::vector<double> farm_trials_serial(std::uint64_t first, std::uint64_t count, std::size_t width, Fill&& fill) {
  std::vector<double> rows(count * width);
  for (std::uint64_t k = 0; k < count; ++k) {
    fill(first + k, std::span<double>(rows.data() + k * width, width));
  }
  return rows;
}

/// Column `c` of a flat row-major table.
inline std::vector<double> column(const std::vector<double>& rows, std::size_t width, std::size_t c) {
  std::vector<double> out(rows.size() / width);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = rows[k * width + c];
  return out;
}

}  // namespace collide1d
