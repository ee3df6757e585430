// Serial reference vs OpenMP kernels on spectral-function sampling and a root search.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <vector>

#include <omp.h>

#include "stokes/parallel.hpp"
#include "stokes/rootfinder.hpp"
#include "stokes/spectral.hpp"

using namespace stokes;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(cplx)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  const int points = argc > 1 ? std::atoi(argv[1]) : 256;
  const int max_threads = omp_get_num_procs();
  std::printf("processors: %d\n\n", max_threads);

  std::vector<cplx> circle;
  for (int j = 0; j < points; ++j) circle.push_back(std::polar(20.0, 2 * std::numbers::pi * j / points));
  const ComplexFunction f = [](cplx E) { return spectral_f(ProblemSpec(3, E)).value; };

  std::vector<cplx> ref;
  const double t_ref = seconds([&] { ref = reference::sample(f, circle); });
  std::printf("sample f on |E| = 20, %d points\n", points);
  std::printf("  %-10s %8s %8s %s\n", "kernel", "seconds", "speedup", "bitwise");
  std::printf("  %-10s %8.3f %8.2f %s\n", "reference", t_ref, 1.0, "-");
  for (int threads = 1; threads <= std::max(4, max_threads); threads *= 2) {
    set_parallelism(threads);
    std::vector<cplx> par;
    const double t = seconds([&] { par = sample(f, circle, Execution::openmp); });
    char label[32];
    std::snprintf(label, sizeof label, "omp x%d", threads);
    std::printf("  %-10s %8.3f %8.2f %s\n", label, t, t_ref / t, identical(par, ref) ? "yes" : "NO");
  }

  std::printf("\nroot search for C, m = 3, |E| <= 20\n");
  const AnalyticFunction C = spectral_handle(3, {SpectralFunctionId::Kind::C});
  RootFinderOptions serial;
  serial.winding.exec = Execution::serial;
  RootSearchResult a, b;
  const double t_serial = seconds([&] { a = find_roots(C, Region::disk(0.0, 20.0), 32, serial); });
  set_parallelism(max_threads);
  const double t_omp = seconds([&] { b = find_roots(C, Region::disk(0.0, 20.0), 32); });
  bool same = a.roots.size() == b.roots.size();
  for (std::size_t i = 0; same && i < a.roots.size(); ++i)
    same = std::memcmp(&a.roots[i].location, &b.roots[i].location, sizeof(cplx)) == 0;
  std::printf("  serial %.3f s, omp x%d %.3f s, speedup %.2f, %zu roots, bitwise %s\n", t_serial, max_threads,
              t_omp, t_serial / t_omp, a.roots.size(), same ? "yes" : "NO");
  return 0;
}
