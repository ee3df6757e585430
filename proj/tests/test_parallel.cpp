#include <gtest/gtest.h>

#include <atomic>
#include <cstring>
#include <stdexcept>

#include "stokes/parallel.hpp"
#include "stokes/rootfinder.hpp"
#include "stokes/spectral.hpp"

using namespace stokes;

namespace {

bool same_bits(cplx a, cplx b) { return std::memcmp(&a, &b, sizeof(cplx)) == 0; }

std::vector<cplx> circle(double r, int n) {
  std::vector<cplx> pts;
  for (int j = 0; j < n; ++j) pts.push_back(std::polar(r, 2 * 3.141592653589793 * j / n));
  return pts;
}

struct ThreadsGuard {
  int saved = parallelism();
  ~ThreadsGuard() { set_parallelism(saved); }
};

}  // namespace

TEST(Sample, SpectralValuesMatchSerialReferenceBitwise) {
  ThreadsGuard guard;
  const auto pts = circle(12.0, 48);
  const ComplexFunction f = [](cplx E) { return spectral_f(ProblemSpec(3, E)).value; };
  const auto ref = reference::sample(f, pts);
  for (int threads : {1, 2, 4, 7}) {
    set_parallelism(threads);
    const auto par = sample(f, pts, Execution::openmp);
    ASSERT_EQ(par.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_TRUE(same_bits(par[i], ref[i])) << threads << " " << i;
  }
  const auto ser = sample(f, pts, Execution::serial);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_TRUE(same_bits(ser[i], ref[i]));
}

TEST(Sample, LowestFailingIndexWins) {
  ThreadsGuard guard;
  set_parallelism(4);
  std::vector<cplx> pts;
  for (int i = 0; i < 64; ++i) pts.emplace_back(i, 0);
  const ComplexFunction f = [](cplx z) -> cplx {
    if (z.real() >= 17 && int(z.real()) % 5 == 2) throw std::runtime_error(std::to_string(int(z.real())));
    return z;
  };
  for (int rep = 0; rep < 5; ++rep) {
    try {
      sample(f, pts);
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "17");
    }
  }
}

TEST(ForEach, VisitsEveryIndexOnce) {
  ThreadsGuard guard;
  set_parallelism(3);
  std::vector<std::atomic<int>> hits(1000);
  for_each_index(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ForEach, NestedCallsRunSerially) {
  ThreadsGuard guard;
  set_parallelism(4);
  std::vector<int> out(16 * 16, 0);
  for_each_index(16, [&](std::size_t i) {
    for_each_index(16, [&](std::size_t j) { out[i * 16 + j] = int(i * j); });
  });
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(out[i * 16 + j], int(i * j));
}

TEST(Parallelism, SetAndQuery) {
  ThreadsGuard guard;
  set_parallelism(5);
  EXPECT_EQ(parallelism(), 5);
  set_parallelism(0);
  EXPECT_GE(parallelism(), 1);
}

TEST(RootSearch, SerialAndParallelAreBitIdentical) {
  ThreadsGuard guard;
  const AnalyticFunction C = spectral_handle(3, {SpectralFunctionId::Kind::C});
  RootFinderOptions serial;
  serial.winding.exec = Execution::serial;
  const auto a = find_roots(C, Region::disk(0.0, 9.0), 16, serial);
  set_parallelism(4);
  const auto b = find_roots(C, Region::disk(0.0, 9.0), 16);
  ASSERT_EQ(a.roots.size(), b.roots.size());
  ASSERT_EQ(a.roots.size(), 3u);
  for (std::size_t i = 0; i < a.roots.size(); ++i) {
    EXPECT_TRUE(same_bits(a.roots[i].location, b.roots[i].location));
    EXPECT_EQ(a.roots[i].residual, b.roots[i].residual);
    EXPECT_EQ(a.roots[i].certificate_radius, b.roots[i].certificate_radius);
  }
}
