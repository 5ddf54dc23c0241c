#include "qnmsusy/propagate.hpp"

#include <algorithm>
#include <cmath>

#include "qnmsusy/errors.hpp"

namespace qnmsusy {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

double sq(double x) { return x * x; }

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct ChSh {
  Complex ch, ch1, ch2;
  Complex sh, sh1, sh2;
};

// Ch(z) = cosh √z and Sh(z) = sinh √z / √z with two z-derivatives.
ChSh ch_sh(Complex z) {
  ChSh r;
  if (std::norm(z) < 16.0) {
    // Taylor series; terms decay like 4^n / (2n)!.
    Complex zn = 1.0;  // z^n
    Complex zn1 = 0.0;  // z^(n-1)
    Complex zn2 = 0.0;  // z^(n-2)
    double fc = 1.0;  // 1 / (2n)!
    double fs = 1.0;  // 1 / (2n+1)!
    for (int n = 0; n < 24; ++n) {
      const double dn = n;
      r.ch += fc * zn;
      r.sh += fs * zn;
      r.ch1 += fc * dn * zn1;
      r.sh1 += fs * dn * zn1;
      r.ch2 += fc * dn * (dn - 1.0) * zn2;
      r.sh2 += fs * dn * (dn - 1.0) * zn2;
      zn2 = zn1;
      zn1 = zn;
      zn *= z;
      fc /= (2.0 * dn + 1.0) * (2.0 * dn + 2.0);
      fs /= (2.0 * dn + 2.0) * (2.0 * dn + 3.0);
      // Next second-derivative term, which decays last.
      if (n >= 2 && std::norm(zn2) * sq(fc * (dn + 1.0) * dn) < 1e-40) break;
    }
    return r;
  }
  const Complex s = std::sqrt(z);
  r.ch = std::cosh(s);
  r.sh = std::sinh(s) / s;
  r.ch1 = 0.5 * r.sh;
  r.sh1 = (r.ch - r.sh) / (2.0 * z);
  r.ch2 = 0.5 * r.sh1;
  r.sh2 = (r.ch1 - 3.0 * r.sh1) / (2.0 * z);
  return r;
}

void check_finite(const JetState& s, double x_last_good) {
  auto ok = [](const Jet& j) {
    return finite(j.v) && finite(j.d1) && finite(j.d2);
  };
  if (!ok(s.phi) || !ok(s.dphi)) {
    throw PropagationError("non-finite solution values (|Im ω| too large for the interval?)", x_last_good);
  }
}

JetState apply(const JetMat2& m, const JetState& s) {
  const auto y = m * std::array<Jet, 2>{s.phi, s.dphi};
  return {y[0], y[1]};
}

// Advance s from x0 to x1 across every knot in between. knots is sorted.
JetState advance(const Potential& v, Complex omega, const std::vector<double>& knots, JetState s, double x0,
                 double x1) {
  if (x0 == x1) return s;
  const bool forward = x1 > x0;
  std::vector<double> stops;
  if (forward) {
    auto b = std::upper_bound(knots.begin(), knots.end(), x0);
    auto e = std::lower_bound(knots.begin(), knots.end(), x1);
    stops.assign(b, e);
  } else {
    auto b = std::upper_bound(knots.begin(), knots.end(), x1);
    auto e = std::lower_bound(knots.begin(), knots.end(), x0);
    stops.assign(std::make_reverse_iterator(e), std::make_reverse_iterator(b));
  }
  stops.push_back(x1);
  double x = x0;
  for (double next : stops) {
    const Side start_side = forward ? Side::Right : Side::Left;
    const Side end_side = forward ? Side::Left : Side::Right;
    const JetMat2 m = cell_propagator(v.limit(x, start_side), v.limit(next, end_side), omega, next - x);
    const JetState n = apply(m, s);
    check_finite(n, x);
    s = n;
    x = next;
  }
  return s;
}

}  // namespace

const char* to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::OutgoingLeft: return "OutgoingLeft";
    case BoundaryKind::OutgoingRight: return "OutgoingRight";
    case BoundaryKind::IncomingLeft: return "IncomingLeft";
    case BoundaryKind::IncomingRight: return "IncomingRight";
  }
  return "?";
}

CMat2 segment_step_kappa(Complex kappa, double dx) {
  const Complex u = kappa * dx;
  Complex c;
  Complex sinc;  // sin(u) / u
  if (std::abs(u) < 1e-3) {
    const Complex u2 = u * u;
    c = 1.0 - u2 / 2.0 * (1.0 - u2 / 12.0 * (1.0 - u2 / 30.0));
    sinc = 1.0 - u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0));
  } else {
    c = std::cos(u);
    sinc = std::sin(u) / u;
  }
  CMat2 m;
  m.m = {c, dx * sinc, -kappa * kappa * dx * sinc, c};
  return m;
}

CMat2 segment_step(double v0, Complex omega, double dx) {
  if (!(dx > 0.0)) throw InvalidInput("segment_step needs dx > 0");
  return segment_step_kappa(std::sqrt(omega * omega - v0), dx);
}

JetMat2 cell_propagator(double v_start, double v_end, Complex omega, double h) {
  // Gauss points at t = 1/2 -+ sqrt(3)/6 along the step.
  const double t1 = 0.5 - kSqrt3 / 6.0;
  const double t2 = 0.5 + kSqrt3 / 6.0;
  const double v1 = v_start + t1 * (v_end - v_start);
  const double v2 = v_start + t2 * (v_end - v_start);
  const double vbar = 0.5 * (v1 + v2);
  const double c = kSqrt3 / 12.0 * h * h * (v1 - v2);

  const Jet w = Jet::variable(omega);
  const Jet qbar = Jet{vbar} - w * w;
  const Jet hq = h * qbar;
  const Jet z = Jet{c * c} + (h * h) * qbar;

  const ChSh f = ch_sh(z.v);
  const Jet ch = compose(z, f.ch, f.ch1, f.ch2);
  const Jet sh = compose(z, f.sh, f.sh1, f.sh2);

  JetMat2 m;
  m.m[0] = ch + c * sh;
  m.m[1] = h * sh;
  m.m[2] = sh * hq;
  m.m[3] = ch - c * sh;
  return m;
}

JetState seed(BoundaryKind kind, Complex omega) {
  const double s = seed_sign(kind);
  // s·iω written out so that ω -> -ω maps the seeds onto each other bit for bit.
  const Complex slope{-s * omega.imag(), s * omega.real()};
  return {Jet{1.0}, Jet{slope, Complex{0.0, s}, 0.0}};
}

Propagator::Propagator(Potential v) : v_(std::move(v)), knots_(v_.knots()) {}

JetState Propagator::to(Complex omega, BoundaryKind kind, double x) const {
  const double a = v_.half_width();
  if (!(std::abs(x) <= a)) throw InvalidInput("propagation target outside [-a, a]");
  const double start = seeded_left(kind) ? -a : a;
  return advance(v_, omega, knots_, seed(kind, omega), start, x);
}

JetState propagate_to(const Potential& v, Complex omega, BoundaryKind kind, double x) {
  return Propagator(v).to(omega, kind, x);
}

WaveSolution solve(const Potential& v, Complex omega, BoundaryKind kind, const Grid& grid) {
  const double a = v.half_width();
  if (grid.size() < 2 || std::abs(grid.lo() + a) > 1e-12 * a || std::abs(grid.hi() - a) > 1e-12 * a) {
    throw InvalidInput("grid must span [-a, a]");
  }
  const std::size_t n = grid.size();
  WaveSolution out;
  out.omega = omega;
  out.kind = kind;
  out.grid = grid;
  for (auto* arr : {&out.phi, &out.dphi_dx, &out.dphi_domega, &out.ddphi_domega_dx, &out.d2phi_domega2,
                    &out.d2dphi_domega2_dx}) {
    arr->resize(n);
  }
  auto store = [&out](std::size_t i, const JetState& s) {
    out.phi[i] = s.phi.v;
    out.dphi_domega[i] = s.phi.d1;
    out.d2phi_domega2[i] = s.phi.d2;
    out.dphi_dx[i] = s.dphi.v;
    out.ddphi_domega_dx[i] = s.dphi.d1;
    out.d2dphi_domega2_dx[i] = s.dphi.d2;
  };
  const auto knots = v.knots();
  JetState s = seed(kind, omega);
  if (seeded_left(kind)) {
    store(0, s);
    for (std::size_t i = 1; i < n; ++i) {
      s = advance(v, omega, knots, s, grid[i - 1], grid[i]);
      store(i, s);
    }
  } else {
    store(n - 1, s);
    for (std::size_t i = n - 1; i-- > 0;) {
      s = advance(v, omega, knots, s, grid[i + 1], grid[i]);
      store(i, s);
    }
  }
  return out;
}

WaveSolution solve(const Potential& v, Complex omega, BoundaryKind kind, std::size_t points) {
  return solve(v, omega, kind, Grid::for_potential(v, points));
}

WaveSolution solve_extrapolated(const Potential& v, Complex omega, BoundaryKind kind, const Grid& grid) {
  WaveSolution fine = solve(v, omega, kind, grid);
  if (v.is_piecewise_constant() || !v.coarsenable()) return fine;
  const WaveSolution coarse = solve(v.coarsened(), omega, kind, grid);
  auto combine = [](std::vector<Complex>& f, const std::vector<Complex>& c) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (4.0 * f[i] - c[i]) / 3.0;
  };
  combine(fine.phi, coarse.phi);
  combine(fine.dphi_dx, coarse.dphi_dx);
  combine(fine.dphi_domega, coarse.dphi_domega);
  combine(fine.ddphi_domega_dx, coarse.ddphi_domega_dx);
  combine(fine.d2phi_domega2, coarse.d2phi_domega2);
  combine(fine.d2dphi_domega2_dx, coarse.d2dphi_domega2_dx);
  return fine;
}

double solution_reality_check(const WaveSolution& sol) {
  if (sol.omega.real() != 0.0) throw InvalidInput("reality check needs purely imaginary ω");
  double m = 0.0;
  for (const auto& p : sol.phi) m = std::max(m, std::abs(p.imag()));
  return m;
}

}  // namespace qnmsusy
