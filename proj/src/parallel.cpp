#include "softmod/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include <omp.h>

namespace softmod {

int default_workers() {
  if (const char* env = std::getenv("SOFTMOD_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1, omp_get_max_threads());
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& job,
                    Schedule schedule, int workers) {
  std::vector<std::exception_ptr> errors(n);
  if (schedule == Schedule::kSerial) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    const int threads = workers > 0 ? workers : default_workers();
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long i = 0; i < count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace softmod
