#include "qnmsusy/jordan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnmsusy/errors.hpp"
#include "qnmsusy/quadrature.hpp"

namespace qnmsusy {

namespace {

double max_abs(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const Complex z : v) m = std::max(m, std::abs(z));
  return m;
}

// Contour count in a small square around ω, shrinking off a nearby zero.
int local_count(const Potential& v, Complex omega) {
  double r = std::min(0.05, 0.25 * std::max(std::abs(omega.imag()), 1e-3));
  for (int attempt = 0;; ++attempt) {
    try {
      return count_zeros(v, Rect::around(omega, r), WronskianKind::Gamma);
    } catch (const ContourError&) {
      if (attempt == 4) throw;
      r *= 0.37;
    }
  }
}

// d/dω (f' - iωf) at the last node, relative to the size of its terms.
double first_order_owc(const WaveSolution& s) {
  const std::size_t n = s.phi.size() - 1;
  const Complex w = s.omega;
  const Complex d = s.ddphi_domega_dx[n] - kI * w * s.dphi_domega[n] - kI * s.phi[n];
  const double size = std::abs(s.ddphi_domega_dx[n]) + std::abs(w * s.dphi_domega[n]) + std::abs(s.phi[n]);
  return std::abs(d) / size;
}

// Roots of a x² + b x + c, smaller modulus first. a may vanish.
std::array<Complex, 2> quadratic_roots(Complex a, Complex b, Complex c) {
  const Complex disc = std::sqrt(b * b - 4.0 * a * c);
  const Complex q = -0.5 * (std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc);
  std::array<Complex, 2> r{};
  const double inf = std::numeric_limits<double>::infinity();
  r[0] = q != 0.0 ? c / q : Complex{inf, inf};
  r[1] = a != 0.0 ? q / a : Complex{inf, inf};
  if (std::abs(r[1]) < std::abs(r[0])) std::swap(r[0], r[1]);
  return r;
}

// -u'' + (v - e)u at every node, with left-hand values at interior joints
// appended in joint order.
std::vector<Complex> operator_residual(const Grid& g, const std::vector<Complex>& u, const std::vector<Complex>& du,
                                       const Potential& v, Complex e, const std::vector<Complex>& rhs) {
  std::vector<Complex> left;
  const auto d2 = differentiate(g, du, &left);
  std::vector<Complex> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = -d2[i] + (v(g[i]) - e) * u[i] - rhs[i];
  const auto& breaks = g.break_indices();
  for (std::size_t k = 0; k < left.size(); ++k) {
    const std::size_t i = breaks[k + 1];
    out.push_back(-left[k] + (v.limit(g[i], Side::Left) - e) * u[i] - rhs[i]);
  }
  return out;
}

}  // namespace

const char* to_string(AlphaPolicy p) { return p == AlphaPolicy::Plain ? "plain" : "smaller_root"; }

std::vector<BlockCandidate> detect_blocks(const SpectrumReport& report) {
  std::vector<BlockCandidate> out;
  std::vector<const Root*> simple;
  for (const auto& r : report.roots) {
    if (r.multiplicity >= 2) {
      out.push_back({r.omega, r.multiplicity, false});
    } else {
      simple.push_back(&r);
    }
  }
  std::vector<bool> used(simple.size(), false);
  for (std::size_t i = 0; i < simple.size(); ++i) {
    for (std::size_t j = i + 1; j < simple.size() && !used[i]; ++j) {
      if (used[j]) continue;
      const Complex a = simple[i]->omega;
      const Complex b = simple[j]->omega;
      const double K = std::max(std::abs(0.5 * (a + b).imag()), tol_axis(a));
      if (std::abs(a - b) < 1e-4 * K) {
        out.push_back({0.5 * (a + b), 2, true});
        used[i] = used[j] = true;
      }
    }
  }
  return out;
}

JordanBlockBasis build_block_basis(const Potential& v_tilde, Complex omega, const Grid& grid, AlphaPolicy policy,
                                   Complex scale) {
  const int n = local_count(v_tilde, omega);
  if (n != 2) {
    throw InvalidInput("zero of the Wronskian at the block frequency is not double (contour count " +
                       std::to_string(n) + ")");
  }
  const WaveSolution sol = solve_extrapolated(v_tilde, omega, BoundaryKind::OutgoingLeft, grid);
  JordanBlockBasis b;
  b.omega = omega;
  b.scale = scale;
  b.policy = policy;
  b.psi0 = mode_from_solution(sol, WronskianKind::Gamma);
  for (auto& p : b.psi0.phi) p *= scale;
  for (auto& d : b.psi0.dphi) d *= scale;

  const std::size_t m = grid.size();
  std::vector<Complex> base(m), dbase(m);
  for (std::size_t i = 0; i < m; ++i) {
    base[i] = scale * sol.dphi_domega[i];
    dbase[i] = scale * sol.ddphi_domega_dx[i];
  }
  b.state0.grid = grid;
  b.state0.psi1 = b.psi0.phi;
  TwoComponentState sb;
  sb.grid = grid;
  sb.psi1 = base;
  for (std::size_t i = 0; i < m; ++i) {
    b.state0.psi2.push_back(-kI * omega * b.psi0.phi[i]);
    sb.psi2.push_back(-kI * (omega * base[i] + b.psi0.phi[i]));
  }
  b.norm00 = bilinear_map(b.state0, b.state0);
  const Complex nb0 = bilinear_map(sb, b.state0);
  const Complex nbb = bilinear_map(sb, sb);
  b.alpha_roots = quadratic_roots(b.norm00, 2.0 * nb0, nbb);
  b.alpha = policy == AlphaPolicy::Plain ? Complex{} : b.alpha_roots[0];

  b.psi1.resize(m);
  b.dpsi1.resize(m);
  b.state1.grid = grid;
  b.state1.psi1.resize(m);
  b.state1.psi2.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    b.psi1[i] = base[i] + b.alpha * b.psi0.phi[i];
    b.dpsi1[i] = dbase[i] + b.alpha * b.psi0.dphi[i];
    b.state1.psi1[i] = b.psi1[i];
    b.state1.psi2[i] = sb.psi2[i] + b.alpha * b.state0.psi2[i];
  }
  b.norm11 = bilinear_map(b.state1, b.state1);
  b.block_norm = bilinear_map(b.state1, b.state0);
  b.outgoing_residual = first_order_owc(sol);

  std::vector<Complex> rhs(m);
  for (std::size_t i = 0; i < m; ++i) rhs[i] = 2.0 * omega * b.psi0.phi[i];
  const auto res = operator_residual(grid, b.psi1, b.dpsi1, v_tilde, omega * omega, rhs);
  b.chain_residual = max_abs(res) / max_abs(rhs);
  return b;
}

JordanBlockBasis build_block_basis(const Potential& v_tilde, Complex omega, AlphaPolicy policy, Complex scale,
                                   std::size_t points) {
  return build_block_basis(v_tilde, omega, Grid::for_potential(v_tilde, points), policy, scale);
}

double time_domain_residual(const JordanBlockBasis& b, const Potential& v_tilde, double t) {
  const Grid& g = b.state0.grid;
  const Complex w = b.omega;
  const Complex it = kI * t;
  std::vector<Complex> u(g.size()), du(g.size()), utt(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    u[i] = b.psi1[i] - it * b.psi0.phi[i];
    du[i] = b.dpsi1[i] - it * b.psi0.dphi[i];
    // ∂ₜ² of u e^{-iωt}, without the common exponential.
    utt[i] = -w * w * u[i] - 2.0 * w * b.psi0.phi[i];
  }
  // Wave equation ∂ₜ²u = ∂ₓ²u - Vu, i.e. -u'' + Vu + ∂ₜ²u = 0.
  std::vector<Complex> rhs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) rhs[i] = -utt[i];
  const auto res = operator_residual(g, u, du, v_tilde, 0.0, rhs);
  return max_abs(res) / max_abs(utt);
}

JordanBlockBasis susy_block_basis(const Generator& gen, const Potential& h, const ModeFunction& source,
                                  AlphaPolicy policy) {
  if (!(source.grid == gen.phi.grid)) throw InvalidInput("source mode and generator live on different grids");
  const Complex w = source.omega;
  if (std::abs(w + gen.omega) > 1e-6 * (1.0 + gen.K)) {
    throw InvalidInput("source mode is not at the frequency opposite to the generator");
  }
  const Potential vt = partner_potential(gen, h);
  const Complex scale = source.phi.front() * (-kI * w + gen.W_minus);
  return build_block_basis(vt, w, gen.phi.grid, policy, scale);
}

BlockNorm block_norm(const JordanBlockBasis& b, const Potential& h, const Generator& gen, const ModeFunction& source,
                     double rel_tol) {
  BlockNorm out;
  out.expected = -2.0 * gen.omega;
  if (std::abs(b.norm00) > 1e-6 * std::abs(b.block_norm)) {
    throw ConsistencyError("(Ψ₀, Ψ₀) does not vanish; the block frequency is not a double zero");
  }
  const Complex source_norm = bilinear_map(eigenstate(source), eigenstate(source));
  out.via_bilinear = b.block_norm / source_norm;
  const Jet ju = unnormalized_partner_wronskian(gen, h, b.omega);
  const Jet j = wronskian(h, b.omega, WronskianKind::Gamma);
  out.via_wronskian = (-0.5 * ju.d2) / (-j.d1);
  out.route_difference = std::abs(out.via_bilinear - out.via_wronskian) / std::abs(out.via_wronskian);
  if (out.route_difference > rel_tol) {
    throw ConsistencyError("block norm differs between the bilinear-map and Wronskian routes");
  }
  return out;
}

ReverseAnnihilation reverse_annihilation(const Generator& gen, const JordanBlockBasis& b, const Potential& h,
                                         const ModeFunction& source) {
  const Grid& g = gen.phi.grid;
  if (!(b.state0.grid == g) || !(source.grid == g)) throw InvalidInput("basis, source and generator grids differ");
  ReverseAnnihilation out;

  const auto a0 = apply_A_adjoint(gen, b.psi0.phi, b.psi0.dphi);
  double terms = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    terms = std::max(terms, std::abs(b.psi0.dphi[i]) + std::abs(gen.W[i] * b.psi0.phi[i]));
  }
  out.annihilation0 = max_abs(a0) / terms;

  const auto u = apply_A_adjoint(gen, b.psi1, b.dpsi1);
  Complex num{};
  double den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num += std::conj(source.phi[i]) * u[i];
    den += std::norm(source.phi[i]);
  }
  out.c = num / den;
  std::vector<Complex> miss(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) miss[i] = u[i] - out.c * source.phi[i];
  out.fit_residual = max_abs(miss) / max_abs(u);
  out.c_error = std::abs(out.c + 2.0 * gen.omega) / std::abs(2.0 * gen.omega);

  // u' = -ψ₁'' + W'ψ₁ + Wψ₁', with ψ₁'' = (Ṽ - ω²)ψ₁ - 2ωψ₀ and W' = W² + Ω² - V.
  const Potential vt = partner_potential(gen, h);
  std::vector<Complex> du(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double W = gen.W[i];
    const Complex d2 = (vt(g[i]) - b.omega * b.omega) * b.psi1[i] - 2.0 * b.omega * b.psi0.phi[i];
    du[i] = -d2 + (W * W + gen.omega_sq - h(g[i])) * b.psi1[i] + W * b.dpsi1[i];
  }
  const std::vector<Complex> zero(g.size());
  const auto res = operator_residual(g, u, du, h, gen.omega_sq, zero);
  out.eigen_residual = max_abs(res) / (std::abs(gen.omega_sq) * max_abs(u));

  out.incoming_admixture = first_order_owc(solve_extrapolated(h, b.omega, BoundaryKind::OutgoingLeft, g));
  out.annihilated = out.annihilation0 <= 1e-8;
  out.c_matches = out.c_error <= 1e-6;
  out.preimage_not_outgoing = out.incoming_admixture > 1e-6;
  return out;
}

Proportionality proportionality_constant(const Generator& gen, const ModeFunction& source) {
  if (!(source.grid == gen.phi.grid)) throw InvalidInput("source mode and generator live on different grids");
  const Complex two_i_omega = 2.0 * kI * gen.omega;
  const auto& phi = gen.phi.phi;
  const auto& psi = source.phi;
  Proportionality out;
  out.via_left = two_i_omega * psi.front() * phi.front();
  out.via_right = -two_i_omega * psi.back() * phi.back();
  out.agreement = std::abs(out.via_left - out.via_right) / std::abs(out.via_left);
  out.surface = std::abs(psi.front() * phi.front() + psi.back() * phi.back()) / std::abs(psi.front() * phi.front());

  const auto mapped = map_state(gen, source).mode.phi;
  const std::size_t mid = gen.phi.grid.nearest(0.0);
  out.direct = mapped[mid] * phi[mid];
  std::vector<Complex> miss(mapped.size());
  for (std::size_t i = 0; i < mapped.size(); ++i) miss[i] = mapped[i] - out.direct / phi[i];
  out.constancy = max_abs(miss) / max_abs(mapped);
  return out;
}

}  // namespace qnmsusy
