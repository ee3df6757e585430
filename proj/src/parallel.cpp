#include "stokes/parallel.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>

#include <omp.h>

namespace stokes {

namespace {

std::atomic<int> g_threads{0};

// Keeps the exception of the smallest failing index.
class FirstFailure {
 public:
  void record(std::size_t index, std::exception_ptr e) {
    std::lock_guard lock(mutex_);
    if (index < index_) {
      index_ = index;
      error_ = std::move(e);
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error_;
};

}  // namespace

void set_parallelism(int threads) { g_threads = threads < 0 ? 0 : threads; }

int parallelism() {
  const int t = g_threads;
  return t > 0 ? t : omp_get_max_threads();
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, Execution exec) {
  if (exec == Execution::serial || n < 2 || omp_in_parallel()) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  FirstFailure failure;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallelism())
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      failure.record(static_cast<std::size_t>(i), std::current_exception());
    }
  }
  failure.rethrow();
}

std::vector<cplx> sample(const ComplexFunction& f, std::span<const cplx> points, Execution exec) {
  std::vector<cplx> values(points.size());
  for_each_index(points.size(), [&](std::size_t i) { values[i] = f(points[i]); }, exec);
  return values;
}

namespace reference {

std::vector<cplx> sample(const ComplexFunction& f, std::span<const cplx> points) {
  std::vector<cplx> values;
  values.reserve(points.size());
  for (const cplx& p : points) values.push_back(f(p));
  return values;
}

}  // namespace reference

}  // namespace stokes
