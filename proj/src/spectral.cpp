#include "stokes/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <regex>

#include "stokes/errors.hpp"

namespace stokes {

SpectralFunctionId SpectralFunctionId::parse(const std::string& text) {
  if (text == "C") return {Kind::C};
  if (text == "g") return {Kind::g};
  if (text == "f") return {Kind::f};
  if (text == "h") return {Kind::h};
  if (text == "f-1" || text == "f_minus_1") return {Kind::f_minus_1};
  static const std::regex w(R"(W\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\))");
  std::smatch match;
  if (std::regex_match(text, match, w)) return wronskian(std::stoi(match[1]), std::stoi(match[2]));
  throw PreconditionError("unknown spectral function '" + text + "'");
}

std::string SpectralFunctionId::name() const {
  switch (kind) {
    case Kind::C: return "C";
    case Kind::g: return "g";
    case Kind::f: return "f";
    case Kind::h: return "h";
    case Kind::f_minus_1: return "f-1";
    case Kind::W: return "W(" + std::to_string(n) + "," + std::to_string(k) + ")";
  }
  return "?";
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

int reduce(int k, int period) {
  const int r = k % period;
  return r < 0 ? r + period : r;
}

// Value carried as mantissa * exp(log) with an absolute error on the mantissa
// scale and an optional E-derivative on the same scale.
struct Scaled {
  cplx mant;
  cplx log;
  double mant_err;
  std::optional<cplx> dmant;

  cplx value() const { return mant * std::exp(log); }
  double abs_err() const { return mant_err * std::exp(log.real()); }
};

struct Plain {
  cplx value;
  double err;
  std::optional<cplx> deriv;
};

/// y0 origin frames at energies omega^j E for the j an evaluation needs.
class EnergyFan {
 public:
  EnergyFan(const ProblemSpec& spec, const SpectralOptions& opts) : spec_(spec), opts_(opts) {}

  const ProblemSpec& spec() const { return spec_; }

  struct Origin {
    SolutionFrame y;
    std::optional<SolutionFrame> var;
  };

  const Origin& y0_origin(int j) {
    const int key = spec_.energy() == cplx{} ? 0 : reduce(j, spec_.m() + 2);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const ProblemSpec rotated = spec_.with_energy(spec_.omega_power(key) * spec_.energy());
    Origin o;
    if (opts_.with_derivative) {
      auto [y, v] = evaluate_y0_with_variation(rotated, 0.0, opts_.rel_tol, opts_.anchor);
      o = {y, v};
    } else {
      o = {evaluate_y0(rotated, 0.0, opts_.rel_tol, opts_.anchor), std::nullopt};
    }
    return cache_.emplace(key, o).first->second;
  }

  // y_a at energy omega^j E, components on the scale exp(frame.log_offset).
  struct Yk {
    cplx y, dy;
    cplx log;
    double rel_err;
    std::optional<cplx> u, du;  // E-derivatives on the same scale
  };

  Yk y_k(int a, int j) {
    const Origin& o = y0_origin(j + 2 * a);
    return rotate(o.y, o.var, a);
  }

  // y_a evaluated from frames of y0 at energy omega^{2a} omega^j E taken at omega^{-a} z.
  Yk rotate(const SolutionFrame& y, const std::optional<SolutionFrame>& var, int a) const {
    const cplx rot = spec_.omega_power(-a);
    Yk out{y.y_mantissa, rot * y.dy_mantissa, y.log_offset, y.err_estimate, {}, {}};
    if (var) {
      // d/dE y0(., omega^{2a} E) = omega^{2a} u0.
      const cplx s = spec_.omega_power(2 * a) * std::exp(var->log_offset - y.log_offset);
      out.u = s * var->y_mantissa;
      out.du = s * rot * var->dy_mantissa;
    }
    return out;
  }

  // y_a at the anchor point on the ray between S_a and S_{a+1}. There the
  // seed applies directly and both y_a and y_{a+1} are of moderate size, so
  // their Wronskian carries no cancellation.
  Yk y_k_at_anchor(int a, int j, int side) {
    const int m = spec_.m();
    const double R = anchor();
    const cplx z = std::polar(R, side * std::numbers::pi / (m + 2));
    const ProblemSpec rotated =
        spec_.with_energy(spec_.omega_power(j + 2 * a) * spec_.energy());
    if (opts_.with_derivative) {
      auto [y, v] = wkb_seed_with_variation(rotated, z, opts_.anchor);
      return rotate(y, v, a);
    }
    return rotate(wkb_seed(rotated, z, opts_.anchor), std::nullopt, a);
  }

  double anchor() {
    if (!anchor_) anchor_ = anchor_radius(spec_, opts_.rel_tol, opts_.anchor);
    return *anchor_;
  }

  static Scaled combine(const Yk& p, const Yk& q) {
    const double size = std::abs(p.y * q.dy) + std::abs(p.dy * q.y);
    Scaled w{p.y * q.dy - p.dy * q.y, p.log + q.log,
             (p.rel_err + q.rel_err + 4.0 * kEps) * size, std::nullopt};
    if (p.u && q.u) w.dmant = *p.u * q.dy + p.y * *q.du - *p.du * q.y - p.dy * *q.u;
    return w;
  }

  Scaled wronskian(int a, int b, int j) {
    const int period = spec_.m() + 2;
    const int d = reduce(b - a, period);
    if (d == 1) return combine(y_k_at_anchor(a, j, +1), y_k_at_anchor(a + 1, j, -1));
    if (d == period - 1) {
      Scaled w = combine(y_k_at_anchor(b, j, +1), y_k_at_anchor(b + 1, j, -1));
      w.mant = -w.mant;
      if (w.dmant) *w.dmant = -*w.dmant;
      return w;
    }
    return combine(y_k(a, j), y_k(b, j));
  }

  // W_{a,b} / W_{c,d} at energy omega^j E; the derivative is with respect to that energy.
  // The denominators used here are adjacent Wronskians, constant in E.
  Plain ratio(int a, int b, int c, int d, int j) {
    const Scaled num = wronskian(a, b, j);
    const Scaled den = wronskian(c, d, j);
    const double den_abs = std::abs(den.value());
    if (!(den_abs > 1e-6) || !std::isfinite(den_abs))
      throw ConsistencyError("adjacent Wronskian vanished numerically; the solution frames are unreliable");
    const cplx scale = std::exp(num.log - den.log);
    const cplx q = scale * (num.mant / den.mant);
    const double err = std::abs(scale) * (num.mant_err + std::abs(num.mant) * den.mant_err / std::abs(den.mant)) /
                       std::abs(den.mant);
    Plain out{q, err, std::nullopt};
    if (num.dmant && den.dmant)
      out.deriv = scale * (*num.dmant * den.mant - num.mant * *den.dmant) / (den.mant * den.mant);
    return out;
  }

  // C(omega^j E) = W_{-1,1} / W_{0,1}.
  Plain stokes_C(int j) { return ratio(-1, 1, 0, 1, j); }

  // g(omega^j E) = W_{-1,2} / W_{1,2}. Equal to C(E) C(omega^2 E) - omega by the
  // connection relation, but free of the cancellation in that difference.
  Plain g(int j) { return ratio(-1, 2, 1, 2, j); }

 private:
  ProblemSpec spec_;
  SpectralOptions opts_;
  std::map<int, Origin> cache_;
  std::optional<double> anchor_;
};

SpectralValue make_value(const ProblemSpec& spec, const Plain& p) {
  return {spec.energy(), p.value, p.err, p.deriv};
}

}  // namespace

SpectralValue wronskian(const ProblemSpec& spec, int i, int j, const SpectralOptions& opts) {
  const int period = spec.m() + 2;
  if (reduce(i, period) == reduce(j, period)) {
    SpectralValue zero{spec.energy(), 0.0, 0.0, std::nullopt};
    if (opts.with_derivative) zero.derivative = 0.0;
    return zero;
  }
  EnergyFan fan(spec, opts);
  const Scaled w = fan.wronskian(i, j, 0);
  SpectralValue out{spec.energy(), w.value(), w.abs_err(), std::nullopt};
  if (w.dmant) out.derivative = *w.dmant * std::exp(w.log);
  return out;
}

SpectralValue stokes_C(const ProblemSpec& spec, const SpectralOptions& opts) {
  EnergyFan fan(spec, opts);
  return make_value(spec, fan.stokes_C(0));
}

SpectralValue spectral_g(const ProblemSpec& spec, const SpectralOptions& opts) {
  EnergyFan fan(spec, opts);
  return make_value(spec, fan.g(0));
}

namespace {

// C(omega^{-1} E) and C(omega E), sharing the y0 evaluations at omega^{+-1} E.
std::pair<Plain, Plain> neighbour_C(EnergyFan& fan) {
  Plain lo = fan.stokes_C(-1);
  Plain hi = fan.stokes_C(1);
  return {lo, hi};
}

}  // namespace

SpectralValue spectral_f(const ProblemSpec& spec, const SpectralOptions& opts) {
  EnergyFan fan(spec, opts);
  const cplx w_inv = spec.omega_power(-1);
  // f(E) = -omega^{-1} g(omega^{-1} E).
  const Plain g = fan.g(-1);
  Plain f{-w_inv * g.value, g.err, {}};
  if (g.deriv) f.deriv = -w_inv * w_inv * *g.deriv;

  // Product route through h; it loses absolute accuracy ~ eps |C C| but
  // must agree within that.
  const auto [lo, hi] = neighbour_C(fan);
  const cplx eps = spec.epsilon();
  const cplx via_h = 1.0 - (lo.value / eps) * (hi.value / eps);
  const double prod_err = std::abs(hi.value) * lo.err + std::abs(lo.value) * hi.err;
  const double slack =
      10.0 * (g.err + prod_err + 8.0 * kEps * (1.0 + std::abs(lo.value * hi.value))) + 1e-10 * std::abs(f.value);
  if (!(std::abs(via_h - f.value) <= slack))
    throw ConsistencyError("f(E) and 1 - h(E/omega) h(omega E) disagree beyond the error estimate");
  return make_value(spec, f);
}

SpectralValue spectral_f_minus_1(const ProblemSpec& spec, const SpectralOptions& opts) {
  EnergyFan fan(spec, opts);
  const cplx w = spec.omega();
  const cplx w_inv = spec.omega_power(-1);
  const auto [lo, hi] = neighbour_C(fan);
  Plain out{-w_inv * lo.value * hi.value,
            std::abs(hi.value) * lo.err + std::abs(lo.value) * hi.err, {}};
  if (lo.deriv && hi.deriv)
    out.deriv = -w_inv * (w_inv * *lo.deriv * hi.value + lo.value * w * *hi.deriv);
  return make_value(spec, out);
}

SpectralValue spectral_h(const ProblemSpec& spec, const SpectralOptions& opts) {
  SpectralValue c = stokes_C(spec, opts);
  const cplx eps = spec.epsilon();
  c.value /= eps;
  if (c.derivative) *c.derivative /= eps;
  return c;
}

SpectralValue spectral_f_via_h(const ProblemSpec& spec, int sign, const SpectralOptions& opts) {
  if (sign != 1 && sign != -1) throw PreconditionError("sign must be +1 or -1");
  EnergyFan fan(spec, opts);
  const auto [lo, hi] = neighbour_C(fan);
  const cplx root = double(sign) * spec.epsilon();
  const cplx h_lo = lo.value / root;
  const cplx h_hi = hi.value / root;
  return {spec.energy(), 1.0 - h_lo * h_hi,
          std::abs(hi.value) * lo.err + std::abs(lo.value) * hi.err, std::nullopt};
}

SpectralValue evaluate(const ProblemSpec& spec, const SpectralFunctionId& id,
                       const SpectralOptions& opts) {
  using K = SpectralFunctionId::Kind;
  switch (id.kind) {
    case K::C: return stokes_C(spec, opts);
    case K::g: return spectral_g(spec, opts);
    case K::f: return spectral_f(spec, opts);
    case K::h: return spectral_h(spec, opts);
    case K::f_minus_1: return spectral_f_minus_1(spec, opts);
    case K::W: return wronskian(spec, id.n, id.k, opts);
  }
  throw PreconditionError("unknown spectral function");
}

double connection_residual(const ProblemSpec& spec, cplx z, const SpectralOptions& opts) {
  const cplx c = stokes_C(spec, opts).value;
  cplx y[3], dy[3];
  for (int a = -1; a <= 1; ++a) {
    // y_a(z, E) = y0(omega^{-a} z, omega^{2a} E), y_a' = omega^{-a} y0'.
    const ProblemSpec rotated = spec.with_energy(spec.omega_power(2 * a) * spec.energy());
    const SolutionFrame f =
        evaluate_y0(rotated, spec.omega_power(-a) * z, opts.rel_tol, opts.anchor);
    y[a + 1] = f.y();
    dy[a + 1] = spec.omega_power(-a) * f.dy();
  }
  const cplx w = spec.omega();
  const cplx terms[6] = {y[0], c * y[1], w * y[2], dy[0], c * dy[1], w * dy[2]};
  double scale = 0.0;
  for (const cplx& t : terms) scale = std::max(scale, std::abs(t));
  const double r = std::max(std::abs(terms[0] - terms[1] + terms[2]),
                            std::abs(terms[3] - terms[4] + terms[5]));
  return scale > 0.0 ? r / scale : r;
}

cplx wronskian01_exact(int m) {
  return cplx(0.0, 2.0) / ProblemSpec(m, 0.0).epsilon();
}

cplx stokes_C_at_zero_exact(int m) { return 1.0 + ProblemSpec(m, 0.0).omega(); }

void self_test(int m, const SpectralOptions& opts) {
  const ProblemSpec spec(m, 0.0);
  const cplx c0 = stokes_C(spec, opts).value;
  const cplx expected = stokes_C_at_zero_exact(m);
  if (std::abs(c0 - expected) > 1e-8 * std::abs(expected)) {
    throw ConsistencyError(
        "self-test failed: C(0) = " + std::to_string(c0.real()) + "+" + std::to_string(c0.imag()) +
        "i, expected 1 + omega; the Wronskian sign or rotation direction is flipped");
  }
}

}  // namespace stokes
