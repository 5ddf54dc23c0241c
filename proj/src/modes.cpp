#include "qnmsusy/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnmsusy/errors.hpp"
#include "qnmsusy/quadrature.hpp"

namespace qnmsusy {

Complex ModeFunction::left_slope() const {
  return kind == WronskianKind::TTM_L ? kI * omega : -kI * omega;
}

Complex ModeFunction::right_slope() const {
  return kind == WronskianKind::TTM_R ? -kI * omega : kI * omega;
}

double ModeFunction::boundary_residual() const {
  const std::size_t l = phi.size() - 1;
  auto end = [this](std::size_t i, Complex s) {
    const double scale = std::abs(dphi[i]) + std::abs(s * phi[i]);
    return scale == 0.0 ? 0.0 : std::abs(dphi[i] - s * phi[i]) / scale;
  };
  return std::max(end(0, left_slope()), end(l, right_slope()));
}

ModeFunction mode_from_solution(const WaveSolution& s, WronskianKind kind) {
  ModeFunction m;
  m.omega = s.omega;
  m.kind = kind;
  m.classification = kind == WronskianKind::Gamma ? classify(s.omega) : ModeClass::TTM;
  m.grid = s.grid;
  m.phi = s.phi;
  m.dphi = s.dphi_dx;
  return m;
}

ModeFunction eigenmode(const Potential& v, Complex omega, WronskianKind kind, const Grid& grid) {
  return mode_from_solution(solve_extrapolated(v, omega, left_kind(kind), grid), kind);
}

ModeFunction eigenmode(const Potential& v, Complex omega, WronskianKind kind, std::size_t points) {
  return eigenmode(v, omega, kind, Grid::for_potential(v, points));
}

TwoComponentState eigenstate(const ModeFunction& m) {
  TwoComponentState s;
  s.grid = m.grid;
  s.psi1 = m.phi;
  s.psi2.resize(m.phi.size());
  for (std::size_t i = 0; i < m.phi.size(); ++i) s.psi2[i] = -kI * m.omega * m.phi[i];
  return s;
}

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw InvalidInput("states live on different grids");
}

// ∫ P e^{s t} dt for t from 0 to len (len may be +inf when Re s < 0).
Complex exterior_integral(Complex p, Complex s, double len) {
  if (len == 0.0) return 0.0;
  if (std::isinf(len)) {
    if (!(s.real() < 0.0)) throw InvalidInput("exterior continuation does not decay; use a finite boundary");
    return -p / s;
  }
  if (std::abs(s * len) < 1e-8) return p * len * (1.0 + 0.5 * s * len);
  return p * (std::exp(s * len) - 1.0) / s;
}

Complex exterior_value(Complex p, Complex s, double len) {
  if (len == 0.0) return p;
  if (std::isinf(len)) return 0.0;
  return p * std::exp(s * len);
}

}  // namespace

Complex mode_pairing(const ModeFunction& m1, const ModeFunction& m2, double b_minus, double b_plus) {
  require_same_grid(m1.grid, m2.grid);
  const double lo = m1.grid.lo();
  const double hi = m1.grid.hi();
  if (b_minus > lo || b_plus < hi) throw InvalidInput("pairing boundaries must lie outside the support");
  const Complex w = m1.omega;
  std::vector<Complex> prod(m1.phi.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = m1.phi[i] * m2.phi[i];
  Complex integral = integrate(m1.grid, prod);
  // Outside: φ(x) = φ(∓a) e^{s (x ∓ a)}; on the left substitute t = -a - x.
  const Complex pl = prod.front();
  const Complex pr = prod.back();
  const Complex sl = -(m1.left_slope() + m2.left_slope());
  const Complex sr = m1.right_slope() + m2.right_slope();
  const double len_l = lo - b_minus;
  const double len_r = b_plus - hi;
  integral += exterior_integral(pl, sl, len_l) + exterior_integral(pr, sr, len_r);
  return 2.0 * w * integral + kI * (exterior_value(pl, sl, len_l) + exterior_value(pr, sr, len_r));
}

Complex mode_pairing(const ModeFunction& m1, const ModeFunction& m2) {
  return mode_pairing(m1, m2, m1.grid.lo(), m1.grid.hi());
}

Complex qnm_norm(const ModeFunction& m, double b_minus, double b_plus) { return mode_pairing(m, m, b_minus, b_plus); }
Complex qnm_norm(const ModeFunction& m) { return mode_pairing(m, m); }

double norm_scale(const ModeFunction& m) {
  std::vector<double> sq(m.phi.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(m.phi[i]);
  return 2.0 * std::abs(m.omega) * integrate(m.grid, sq) + std::norm(m.phi.front()) + std::norm(m.phi.back());
}

bool is_zero_norm(const ModeFunction& m, double rel_tol) {
  const Complex n = m.norm ? *m.norm : qnm_norm(m);
  return std::abs(n) <= rel_tol * norm_scale(m);
}

Complex bilinear_map(const TwoComponentState& psi, const TwoComponentState& phi) {
  require_same_grid(psi.grid, phi.grid);
  const std::size_t n = psi.psi1.size();
  if (psi.psi2.size() != n || phi.psi1.size() != n || phi.psi2.size() != n) {
    throw InvalidInput("state components do not match the grid");
  }
  std::vector<Complex> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = psi.psi1[i] * phi.psi2[i] + psi.psi2[i] * phi.psi1[i];
  std::vector<Complex> left;
  if (!psi.psi2_left.empty() || !phi.psi2_left.empty()) {
    const auto& breaks = psi.grid.break_indices();
    left.resize(breaks.size() - 2);
    for (std::size_t k = 0; k < left.size(); ++k) {
      const std::size_t i = breaks[k + 1];
      const Complex a2 = psi.psi2_left.empty() ? psi.psi2[i] : psi.psi2_left[k];
      const Complex b2 = phi.psi2_left.empty() ? phi.psi2[i] : phi.psi2_left[k];
      left[k] = psi.psi1[i] * b2 + a2 * phi.psi1[i];
    }
  }
  const Complex integral = integrate(psi.grid, f, left);
  const Complex surface = psi.psi1.front() * phi.psi1.front() + psi.psi1.back() * phi.psi1.back();
  return kI * (integral + surface);
}

TwoComponentState hamiltonian_action(const TwoComponentState& s, const Potential& v) {
  std::vector<Complex> d2_left;
  const auto d2 = differentiate2(s.grid, s.psi1, &d2_left);
  TwoComponentState out;
  out.grid = s.grid;
  out.psi1.resize(s.psi1.size());
  out.psi2.resize(s.psi1.size());
  for (std::size_t i = 0; i < s.psi1.size(); ++i) {
    out.psi1[i] = kI * s.psi2[i];
    out.psi2[i] = kI * (d2[i] - v(s.grid[i]) * s.psi1[i]);
  }
  const auto& breaks = s.grid.break_indices();
  out.psi2_left.resize(d2_left.size());
  for (std::size_t k = 0; k < d2_left.size(); ++k) {
    const std::size_t i = breaks[k + 1];
    out.psi2_left[k] = kI * (d2_left[k] - v.limit(s.grid[i], Side::Left) * s.psi1[i]);
  }
  return out;
}

double gamma_membership_residual(const TwoComponentState& s) {
  const auto d = differentiate(s.grid, s.psi1);
  double scale = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) scale = std::max({scale, std::abs(d[i]), std::abs(s.psi2[i])});
  if (scale == 0.0) return 0.0;
  const double left = std::abs(s.psi2.front() - d.front());
  const double right = std::abs(s.psi2.back() + d.back());
  return std::max(left, right) / scale;
}

std::vector<Complex> expansion_coeffs(const TwoComponentState& s, const std::vector<ModeFunction>& modes) {
  std::vector<Complex> out;
  out.reserve(modes.size());
  for (const auto& m : modes) {
    if (is_zero_norm(m)) {
      throw JordanBlockError("mode with vanishing norm in the expansion set; use the Jordan-block basis");
    }
    const auto e = eigenstate(m);
    out.push_back(bilinear_map(e, s) / bilinear_map(e, e));
  }
  return out;
}

std::vector<Complex> expansion_sum(const std::vector<Complex>& coeffs, const std::vector<ModeFunction>& modes) {
  if (coeffs.size() != modes.size() || modes.empty()) throw InvalidInput("one coefficient per mode is needed");
  std::vector<Complex> out(modes.front().phi.size());
  for (std::size_t j = 0; j < modes.size(); ++j) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeffs[j] * modes[j].phi[i];
  }
  return out;
}

FirstOrderShift first_order_shift(const ModeFunction& m, const Potential& dv) {
  const Complex norm = m.norm ? *m.norm : qnm_norm(m);
  if (std::abs(norm) <= 1e-8 * norm_scale(m)) {
    throw JordanBlockError("first-order shift undefined for a zero-norm mode");
  }
  const auto& breaks = m.grid.break_indices();
  for (const double x : dv.breakpoints()) {
    const bool on_joint = std::any_of(breaks.begin(), breaks.end(), [&](std::size_t i) {
      return std::abs(m.grid[i] - x) <= 1e-12 * (1.0 + std::abs(x));
    });
    if (!on_joint && x > m.grid.lo() && x < m.grid.hi()) {
      throw InvalidInput("perturbation jumps inside a grid piece; build the mode on a grid with a joint there");
    }
  }
  std::vector<Complex> f(m.phi.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = m.phi[i] * m.phi[i] * dv(m.grid[i]);
  std::vector<Complex> left(breaks.size() - 2);
  for (std::size_t k = 0; k < left.size(); ++k) {
    const std::size_t i = breaks[k + 1];
    left[k] = m.phi[i] * m.phi[i] * dv.limit(m.grid[i], Side::Left);
  }
  FirstOrderShift out;
  out.delta_omega = integrate(m.grid, f, left) / norm;
  out.delta_omega_sq = 2.0 * m.omega * out.delta_omega;
  return out;
}

// ---------------------------------------------------------------------------
// Nodes

namespace {

int sign_changes(const std::vector<double>& v, double band) {
  int count = 0;
  int last = 0;
  for (double x : v) {
    if (std::abs(x) <= band) continue;
    const int s = x > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

// Cubic Hermite interpolant on one cell, t in [0, 1].
Complex hermite(Complex p0, Complex d0, Complex p1, Complex d1, double h, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * h * d1;
}

// Positions where the complex function p (with derivative d) vanishes.
int complex_zeros(const Grid& g, const std::vector<Complex>& p, const std::vector<Complex>& d,
                  const std::vector<Complex>& d_left) {
  double peak = 0.0;
  for (const auto& z : p) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return 0;
  const double band = 1e-9 * peak;
  const auto& breaks = g.break_indices();
  int count = 0;
  double last_x = -std::numeric_limits<double>::infinity();
  std::size_t piece = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    while (i >= breaks[piece + 1]) ++piece;
    const double h = g[i + 1] - g[i];
    const Complex p0 = p[i];
    const Complex p1 = p[i + 1];
    // derivative at the right end of the cell, as seen from inside the cell
    const bool joint = (i + 1 == breaks[piece + 1]) && piece + 1 < breaks.size() - 1;
    const Complex d0 = d[i];
    const Complex d1 = joint && !d_left.empty() ? d_left[piece] : d[i + 1];
    const Complex dp = p1 - p0;
    double t = dp == 0.0 ? 0.0 : std::clamp(-std::real(std::conj(p0) * dp) / std::norm(dp), 0.0, 1.0);
    if (std::abs(p0 + t * dp) > 1e-3 * peak) continue;
    // golden-section search for the minimum of |H(t)|
    double a = 0.0;
    double b = 1.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a);
    double e = a + r * (b - a);
    auto f = [&](double s) { return std::abs(hermite(p0, d0, p1, d1, h, s)); };
    double fc = f(c);
    double fe = f(e);
    for (int it = 0; it < 80; ++it) {
      if (fc < fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - r * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + r * (b - a);
        fe = f(e);
      }
    }
    t = 0.5 * (a + b);
    const double best = std::min({f(t), std::abs(p0), std::abs(p1)});
    if (best > band) continue;
    const double x = g[i] + t * h;
    if (x - last_x < 0.5 * h) continue;
    last_x = x;
    ++count;
  }
  return count;
}

Complex phase_rotation(const std::vector<Complex>& phi, bool& boundary_node) {
  double peak = 0.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (std::abs(phi[i]) > peak) {
      peak = std::abs(phi[i]);
      at = i;
    }
  }
  boundary_node = std::abs(phi.front()) <= 1e-9 * peak;
  const Complex ref = boundary_node ? phi[at] : phi.front();
  if (ref == 0.0) return 1.0;
  return std::conj(ref) / std::abs(ref);
}

}  // namespace

NodeCount count_nodes_antinodes(const ModeFunction& m, const Potential& v) {
  NodeCount out;
  const Complex rot = phase_rotation(m.phi, out.boundary_node);
  const std::size_t n = m.phi.size();
  std::vector<double> re(n), im(n), dre(n), dim(n);
  double peak = 0.0;
  double dpeak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex p = rot * m.phi[i];
    const Complex d = rot * m.dphi[i];
    re[i] = p.real();
    im[i] = p.imag();
    dre[i] = d.real();
    dim[i] = d.imag();
    peak = std::max(peak, std::abs(p));
    dpeak = std::max(dpeak, std::abs(d));
  }
  out.re_nodes = sign_changes(re, 1e-9 * peak);
  out.im_nodes = sign_changes(im, 1e-9 * peak);
  out.re_antinodes = sign_changes(dre, 1e-9 * dpeak);
  out.im_antinodes = sign_changes(dim, 1e-9 * dpeak);

  if (std::abs(m.omega.real()) <= tol_axis(m.omega)) {
    out.nodes = out.re_nodes + (out.boundary_node ? 1 : 0);
    out.antinodes = out.re_antinodes;
    return out;
  }
  out.complex_zeros = true;
  const Complex w2 = m.omega * m.omega;
  std::vector<Complex> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (v(m.grid[i]) - w2) * m.phi[i];
  const auto& breaks = m.grid.break_indices();
  std::vector<Complex> d2_left(breaks.size() - 2);
  for (std::size_t k = 0; k < d2_left.size(); ++k) {
    const std::size_t i = breaks[k + 1];
    d2_left[k] = (v.limit(m.grid[i], Side::Left) - w2) * m.phi[i];
  }
  out.nodes = complex_zeros(m.grid, m.phi, m.dphi, {});
  out.antinodes = complex_zeros(m.grid, m.dphi, d2, d2_left);
  return out;
}

SurfaceIdentity zero_mode_surface_identity(const ModeFunction& m1, const ModeFunction& m2) {
  for (const auto* m : {&m1, &m2}) {
    if (!(std::abs(m->omega.real()) <= tol_axis(m->omega) && m->omega.imag() < 0.0)) {
      throw InvalidInput("surface identity needs two zero modes ω = -iγ");
    }
  }
  require_same_grid(m1.grid, m2.grid);
  bool unused = false;
  const Complex r1 = phase_rotation(m1.phi, unused);
  const Complex r2 = phase_rotation(m2.phi, unused);
  const double g1 = -m1.omega.imag();
  const double g2 = -m2.omega.imag();
  std::vector<Complex> prod(m1.phi.size());
  std::vector<double> aprod(m1.phi.size());
  for (std::size_t i = 0; i < prod.size(); ++i) {
    prod[i] = r1 * m1.phi[i] * r2 * m2.phi[i];
    aprod[i] = std::abs(prod[i]);
  }
  const Complex surface = prod.front() + prod.back();
  SurfaceIdentity out;
  out.residual = std::abs(-(g1 + g2) * integrate(m1.grid, prod) + surface);
  out.scale = (g1 + g2) * integrate(m1.grid, aprod) + std::abs(prod.front()) + std::abs(prod.back());
  return out;
}

ModeFunction normalize(ModeFunction m) {
  const Complex n = qnm_norm(m);
  if (std::abs(n) <= 1e-8 * norm_scale(m)) throw JordanBlockError("cannot normalize a zero-norm mode");
  Complex c = std::sqrt(2.0 * m.omega / n);
  const Complex lead = c * m.phi.front();
  if (lead.real() < 0.0 || (lead.real() == 0.0 && lead.imag() < 0.0)) c = -c;
  for (auto& p : m.phi) p *= c;
  for (auto& d : m.dphi) d *= c;
  m.norm = qnm_norm(m);
  return m;
}

}  // namespace qnmsusy
