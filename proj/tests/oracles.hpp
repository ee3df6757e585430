#pragma once

// Reference computations that share no code with the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

using cld = std::complex<long double>;

inline constexpr long double kAi0 = 0.35502805388781723926006318600418318L;
inline constexpr long double kAiPrime0 = -0.25881940379280679840518356018920396L;

/// Ai(z) and Ai'(z) from the Maclaurin series, summed in long double.
/// Fine for |z| <= 4 or so.
inline std::pair<cld, cld> airy(cld z) {
  // Ai = a f - b g with f, g the even/odd power series of y'' = z y.
  cld f = 1, g = z, df = 0, dg = 1;
  cld tf = 1, tg = z;
  const cld z3 = z * z * z;
  for (int k = 1; k < 200; ++k) {
    const long double n = 3.0L * k;
    tf *= z3 / ((n - 1) * n);
    tg *= z3 / (n * (n + 1));
    f += tf;
    g += tg;
    df += tf * n / z;
    dg += tg * (n + 1) / z;
    if (std::abs(tf) + std::abs(tg) < 1e-30L * (std::abs(f) + std::abs(g))) break;
  }
  return {kAi0 * f + kAiPrime0 * g, kAi0 * df + kAiPrime0 * dg};
}

/// Number of eigenvalues below `lambda` of the symmetric tridiagonal matrix
/// (diag, off), by the Sturm sequence of leading minors.
inline int sturm_count(const std::vector<long double>& diag, long double off, long double lambda) {
  int count = 0;
  long double q = 1;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    q = diag[i] - lambda - (i ? off * off / q : 0.0L);
    if (q == 0) q = 1e-300L;
    if (q < 0) ++count;
  }
  return count;
}

/// k-th eigenvalue (k = 0, 1, ...) of -y'' + x^4 y = lambda y on the real line,
/// from second-order finite differences on [-L, L] with Richardson extrapolation.
inline long double quartic_level(int k, long double L = 6.0L, int n = 3000) {
  auto solve = [&](int points) {
    const long double h = 2 * L / (points + 1);
    std::vector<long double> diag(points);
    for (int i = 0; i < points; ++i) {
      const long double x = -L + h * (i + 1);
      diag[i] = 2 / (h * h) + x * x * x * x;
    }
    const long double off = -1 / (h * h);
    long double lo = 0, hi = 100;
    for (int it = 0; it < 200 && hi - lo > 1e-16L * hi; ++it) {
      const long double mid = 0.5L * (lo + hi);
      (sturm_count(diag, off, mid) > k ? hi : lo) = mid;
    }
    return 0.5L * (lo + hi);
  };
  const long double coarse = solve(n);
  const long double fine = solve(2 * n + 1);  // exactly half the spacing
  return (4 * fine - coarse) / 3;
}

/// Brute-force admissibility for rays on the grid k pi/12 (k = 0..23).
/// label[k] is 0 (none), 1 (A) or 2 (B). Tries every boundary subset and parity.
inline bool rays_admissible(const std::vector<int>& label) {
  const int N = static_cast<int>(label.size());
  std::vector<int> rays;
  for (int k = 0; k < N; ++k)
    if (label[k]) rays.push_back(k);
  const int r = static_cast<int>(rays.size());
  if (r == 0) return false;
  int gap = 0;  // in units of pi/12
  for (int i = 0; i < r; ++i) {
    const int next = i + 1 < r ? rays[i + 1] : rays[0] + N;
    gap = std::max(gap, next - rays[i]);
  }
  // rho = pi / (gap pi/12) = 12/gap must exceed 1/2.
  if (2 * 12 <= gap) return false;
  for (std::uint32_t mask = 1; mask < (1u << r); ++mask) {
    std::vector<int> b;
    for (int i = 0; i < r; ++i)
      if (mask >> i & 1) b.push_back(rays[i]);
    if (b.size() % 2) continue;
    for (int first_even = 0; first_even < 2; ++first_even) {
      bool ok = true;
      for (std::size_t s = 0; s < b.size() && ok; ++s) {
        const int start = b[s];
        const int end = s + 1 < b.size() ? b[s + 1] : b[0] + N;
        const bool even = (s % 2 == 0) == (first_even == 1);
        const int opening = end - start;
        const int ls = label[start % N], le = label[end % N];
        std::vector<int> inner;
        for (int k = start + 1; k < end; ++k)
          if (label[k % N]) inner.push_back(label[k % N]);
        if (even) {
          ok = opening == gap && inner.empty();
        } else {
          ok = opening <= gap && ls == le;
          for (int l : inner) ok = ok && l != ls;
          if (inner.empty()) ok = ok && opening == gap;
        }
      }
      if (ok) return true;
    }
  }
  return false;
}

}  // namespace oracle
