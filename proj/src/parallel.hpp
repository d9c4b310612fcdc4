#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <vector>

namespace dgb {

/// Keeps the exception thrown at the lowest loop index so that parallel loops
/// report the same failure regardless of thread count.
class FirstError {
 public:
  void record(std::size_t index, std::exception_ptr e) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (index < index_) {
      index_ = index;
      error_ = std::move(e);
    }
  }
  bool has_error_before(std::size_t index) {
    std::lock_guard<std::mutex> lock(mutex_);
    return index_ < index;
  }
  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error_;
};

/// Sum of f(i) for i in [0, n) with a fixed chunked reduction order, so the
/// result does not depend on the number of threads.
template <class T, class F>
T deterministic_sum(std::size_t n, F&& f, T zero = T{}) {
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<T> partial(chunks, zero);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    T acc = zero;
    const std::size_t end = std::min(n, (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) acc += f(i);
    partial[c] = acc;
  }
  T total = zero;
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace dgb
