#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stokes/parallel.hpp"
#include "stokes/spectral.hpp"

namespace stokes {

/// F(E) together with an optional derivative. When `value_and_derivative`
/// is empty, Newton falls back to central differences.
struct AnalyticFunction {
  std::function<cplx(cplx)> value;
  std::function<std::pair<cplx, cplx>(cplx)> value_and_derivative;

  AnalyticFunction() = default;
  AnalyticFunction(std::function<cplx(cplx)> f,
                   std::function<std::pair<cplx, cplx>(cplx)> fd = {})
      : value(std::move(f)), value_and_derivative(std::move(fd)) {}
};

class Region {
 public:
  enum class Kind { rectangle, disk };

  static Region rectangle(double re_min, double re_max, double im_min, double im_max);
  static Region disk(cplx center, double radius);

  Kind kind() const noexcept { return kind_; }
  /// Rectangle corners (for a disk, its bounding square).
  double re_min() const noexcept { return x0_; }
  double re_max() const noexcept { return x1_; }
  double im_min() const noexcept { return y0_; }
  double im_max() const noexcept { return y1_; }
  cplx center() const noexcept;
  double radius() const noexcept { return radius_; }  // disks only
  double diameter() const noexcept;

  bool contains(cplx z) const noexcept;  // closed region
  /// Same shape pushed outward by `margin` on every side.
  Region expanded(double margin) const;

  /// Boundary parametrization on [0, 1), counterclockwise.
  cplx boundary_point(double t) const noexcept;
  /// Parameters where the boundary has corners; always sampled.
  std::vector<double> corner_parameters() const;

 private:
  Kind kind_ = Kind::rectangle;
  double x0_ = 0, x1_ = 0, y0_ = 0, y1_ = 0;
  cplx center_{};
  double radius_ = 0;
};

struct WindingOptions {
  int initial_samples = 64;
  /// Hard cap on boundary samples per contour.
  int max_samples = 1 << 16;
  /// Smallest parameter step (edge length 1) before a zero is assumed on the contour.
  double min_step = 1e-9;
  int max_nudges = 3;
  Execution exec = Execution::openmp;
};

struct WindingResult {
  int count = 0;
  /// The contour actually used (differs from the input after nudging).
  Region region;
  int nudges = 0;
  int samples = 0;
  double min_abs = 0.0;
  double max_abs = 0.0;
};

/// Number of zeros of F inside `region`, with multiplicity, by the argument
/// principle. Moves the contour outward by 1e-3 of the diameter when it
/// passes too close to a zero.
WindingResult winding_count(const AnalyticFunction& F, const Region& region,
                            const WindingOptions& opts = {});
int winding_count(const std::function<cplx(cplx)>& F, const Region& region);

struct RootRecord {
  cplx location{};
  /// Winding number of the final isolating circle.
  int winding_certificate = 0;
  double certificate_radius = 0.0;
  /// |F(location)| relative to the local scale max|F|_circle * max(1,|E|) / radius,
  /// i.e. about the relative error of the location.
  double residual = 0.0;
  /// min |F| on the isolating circle / |F(location)| (inf for an exact zero).
  double separation = 0.0;
  bool refined = false;
  /// Filled in by verify_radial.
  std::optional<double> angular_deviation;
};

struct RootFinderOptions {
  /// Newton stopping tolerance, relative to max(1, |E|).
  double tol = 1e-12;
  /// Largest accepted residual for a refined root.
  double residual_floor = 1e-9;
  int max_newton = 60;
  int max_cells = 20000;
  /// Cells smaller than this fraction of the region diameter are not split further.
  double min_cell_fraction = 1e-9;
  WindingOptions winding{};
};

struct RootSearchResult {
  std::vector<RootRecord> roots;  // sorted by modulus, then argument
  /// Winding count of the (possibly nudged) region boundary.
  int expected = 0;
  /// Region actually searched.
  Region region;
  bool complete = true;
  std::string diagnostic;
};

/// Throws PreconditionError if the region holds more than max_roots zeros.
RootSearchResult find_roots(const AnalyticFunction& F, const Region& region, int max_roots,
                            const RootFinderOptions& opts = {});

/// One Newton correction F/F' at z, with F' from the attached derivative or,
/// when `central_difference` is set or none is attached, from central differences.
cplx newton_step(const AnalyticFunction& F, cplx z, bool central_difference = false);

/// Boundary problem (n, k): decay in S_n and S_k.
struct BoundaryProblem {
  int m = 3;
  int n = 0;
  int k = 0;
  /// Throws PreconditionError unless n, k are neither equal nor adjacent mod m+2.
  void validate() const;
};

RootSearchResult eigenvalues_nk(const BoundaryProblem& problem, const Region& region,
                                const RootFinderOptions& opts = {},
                                const SpectralOptions& spectral = {}, int max_roots = 64);

/// Argument of 1/(w_n w_k) for the unit bisectors of S_n and S_k, in (-pi, pi].
double predicted_ray(int m, int n, int k);

struct RadialReport {
  double angle = 0.0;
  double angular_tol = 0.0;
  double max_deviation = 0.0;
  bool pass = true;
  int checked = 0;
  int excluded_at_origin = 0;
  std::vector<RootRecord> roots;  // input with angular_deviation set
};

/// Distance of each root's argument from `angle`; roots with |E| < 1e-6 are skipped.
RadialReport verify_radial(const std::vector<RootRecord>& roots, double angle, double angular_tol);

/// Same, with the deviation measured to the nearest of several rays.
RadialReport verify_radial_any(const std::vector<RootRecord>& roots,
                               const std::vector<double>& angles, double angular_tol);

struct OrderEstimate {
  double slope = 0.0;
  std::vector<double> radii;    // radii that entered the fit
  std::vector<double> log_max;  // log M(r) at those radii
  std::vector<double> dropped;  // radii with M(r) <= 1
  bool sub_exponential = false;
};

/// Least-squares slope of log log M(r) against log r, M(r) = max |F| on |E| = r.
OrderEstimate order_estimate(const std::function<cplx(cplx)>& F, const std::vector<double>& radii,
                             Execution exec = Execution::openmp);

/// F = evaluate(ProblemSpec(m, E), id), with the variational derivative attached.
AnalyticFunction spectral_handle(int m, const SpectralFunctionId& id, const SpectralOptions& opts = {});

}  // namespace stokes
