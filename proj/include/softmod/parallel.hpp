#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace softmod {

enum class Schedule { kSerial, kOpenMP };

// Worker count from SOFTMOD_WORKERS, else the OpenMP default. Always >= 1.
int default_workers();

// Runs job(i) for i in [0, n). Each job writes only its own slot, so results
// do not depend on the schedule. The first exception (by index) is rethrown
// after all jobs finish.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& job,
                    Schedule schedule = Schedule::kOpenMP, int workers = 0);

template <class T>
std::vector<T> map_indices(std::size_t n, const std::function<T(std::size_t)>& job,
                           Schedule schedule = Schedule::kOpenMP, int workers = 0) {
  std::vector<T> out(n);
  for_each_index(n, [&](std::size_t i) { out[i] = job(i); }, schedule, workers);
  return out;
}

}  // namespace softmod
