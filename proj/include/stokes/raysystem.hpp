#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stokes {

/// p/q with q > 0 and gcd(p, q) = 1.
struct Fraction {
  std::int64_t p = 0;
  std::int64_t q = 1;

  static Fraction make(std::int64_t p, std::int64_t q);
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
  friend Fraction operator+(Fraction a, Fraction b);
  friend Fraction operator-(Fraction a, Fraction b);
  friend bool operator==(const Fraction&, const Fraction&) = default;
  friend bool operator<(Fraction a, Fraction b);
};

/// An angle in radians, remembering an exact multiple of pi when it was
/// given as one. Comparisons between two exact angles are exact.
class Angle {
 public:
  Angle() = default;
  static Angle radians(double value);
  static Angle pi_multiple(std::int64_t p, std::int64_t q);
  static Angle pi_multiple(Fraction f) { return pi_multiple(f.p, f.q); }
  /// "1.25", "-0.3e1", "pi", "-pi", "2/5pi", "2/5*pi", "3pi/4".
  static Angle parse(const std::string& text);

  double radians() const noexcept { return rad_; }
  const std::optional<Fraction>& pi_fraction() const noexcept { return pi_; }
  bool exact() const noexcept { return pi_.has_value(); }
  /// Representative in [0, 2 pi).
  Angle normalized() const;
  std::string to_string() const;

  friend Angle operator+(const Angle& a, const Angle& b);
  friend Angle operator-(const Angle& a, const Angle& b);

 private:
  double rad_ = 0.0;
  std::optional<Fraction> pi_;
};

/// -1, 0, 1; exact when both angles are exact, otherwise within tol.
int compare(const Angle& a, const Angle& b, double tol);

enum class RayLabel { A, B };
char label_char(RayLabel l);
RayLabel opposite(RayLabel l);

struct LabeledRay {
  Angle angle;
  RayLabel label;
};

/// Rays through the origin with labels A (value 0) and B (value 1),
/// sorted by angle in [0, 2 pi).
class LabeledRaySystem {
 public:
  /// Throws PreconditionError if empty or if two rays coincide within tol.
  explicit LabeledRaySystem(std::vector<LabeledRay> rays, double angle_tol = 1e-9);
  static LabeledRaySystem from_labels(const std::vector<Angle>& a, const std::vector<Angle>& b,
                                      double angle_tol = 1e-9);

  const std::vector<LabeledRay>& rays() const noexcept { return rays_; }
  std::size_t size() const noexcept { return rays_.size(); }
  /// Angle from ray i to ray i+1 (cyclic).
  Angle gap(std::size_t i) const;
  LabeledRaySystem rotated(const Angle& by) const;
  LabeledRaySystem swapped() const;
  double angle_tol() const noexcept { return tol_; }

 private:
  std::vector<LabeledRay> rays_;
  double tol_;
};

/// The conditions tried, in the order they are checked.
enum class Condition {
  order_bound,    // rho = pi/omega_gap > 1/2
  opening,        // even openings equal pi/rho, odd ones at most pi/rho
  odd_boundary,   // both boundary rays of an odd sector carry one label
  even_interior,  // no rays inside an even sector
  odd_interior,   // rays inside an odd sector carry the other label
  empty_odd,      // an odd sector without interior rays opens exactly pi/rho
};
std::string condition_name(Condition c);

struct SectorDiagnostic {
  Angle start;
  Angle end;
  Angle opening;
  bool even = false;
  RayLabel start_label = RayLabel::A;
  RayLabel end_label = RayLabel::A;
  std::vector<RayLabel> interior;
  std::vector<Condition> passed;
  std::optional<Condition> failed;
};

struct Partition {
  std::vector<std::size_t> boundary;  // indices into the system's rays, cyclic order
  bool first_even = true;             // parity of the sector starting at boundary[0]
};

struct AdmissibilityReport {
  bool admissible = false;
  Angle omega_gap;
  double rho = 0.0;
  std::optional<Fraction> rho_exact;
  std::vector<LabeledRay> partition;  // boundary rays C_1..C_2k
  std::vector<SectorDiagnostic> sectors;
  std::optional<Condition> failure_witness;
  int candidates_tried = 0;
  std::vector<Partition> all_solutions;  // filled only when requested
};

struct AdmissibilityOptions {
  bool collect_all = false;
};

AdmissibilityReport admissibility_check(const LabeledRaySystem& system,
                                        const AdmissibilityOptions& opts = {});

/// Checks conditions on one explicit partition; shared with exhaustive checkers.
std::vector<SectorDiagnostic> check_partition(const LabeledRaySystem& system, const Partition& p,
                                              const Angle& omega_gap, std::optional<Condition>* first_failure);

struct Line {
  Angle direction;        // taken mod pi
  std::complex<double> point{};
};

enum class LineRelation { parallel_distinct, intersecting, identical };

struct LineClassification {
  LineRelation relation;
  std::vector<std::string> forms;  // permitted transcendental forms
  std::string verdict;
};

/// Entire functions with zeros on one line and 1-points on the other.
LineClassification classify_two_lines(const Line& first, const Line& second, double angle_tol = 1e-9);
LineClassification classify_two_lines(LineRelation relation);

struct ThreeRayReport {
  enum class Verdict { admissible, split, inadmissible };
  Angle alpha;
  Verdict verdict = Verdict::inadmissible;
  AdmissibilityReport admissibility;
  std::optional<double> rho;
  /// Empty when the question is open.
  std::optional<bool> exact_rays_possible;
  bool close_to_rays_possible = false;
  /// "realized for m = 3", "impossible", "existence open for exact rays".
  std::string exact_rays;
  std::optional<int> realizing_m;
};

/// Zeros near the positive ray, 1-points near the rays at +-alpha.
ThreeRayReport three_ray_check(const Angle& alpha, double angle_tol = 1e-9);

}  // namespace stokes
