#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stokes {

using cplx = std::complex<double>;
using ComplexFunction = std::function<cplx(cplx)>;

enum class Execution { serial, openmp };

/// Upper bound on OpenMP threads used by the kernels below; 0 keeps the runtime default.
void set_parallelism(int threads);
int parallelism();

/// values[i] = f(points[i]). Exceptions thrown by f are rethrown on the
/// calling thread; when several points fail, the lowest index wins so the
/// outcome does not depend on scheduling.
std::vector<cplx> sample(const ComplexFunction& f, std::span<const cplx> points,
                         Execution exec = Execution::openmp);

/// body(i) for i in [0, n) with the same exception contract as sample().
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body,
                    Execution exec = Execution::openmp);

namespace reference {
/// Plain loop; the OpenMP kernels must agree with it bit for bit.
std::vector<cplx> sample(const ComplexFunction& f, std::span<const cplx> points);
}  // namespace reference

}  // namespace stokes
