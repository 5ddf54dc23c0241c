#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qnmsusy/errors.hpp"
#include "qnmsusy/modes.hpp"
#include "qnmsusy/quadrature.hpp"

using namespace qnmsusy;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Complex zero_mode(double v0, double lo, double hi) { return {0.0, -oracle::even_zero_mode(v0, 1.0, lo, hi)}; }

std::vector<ModeFunction> modes_of(const Potential& v, const Rect& region, const Grid& grid) {
  std::vector<ModeFunction> out;
  for (const auto& r : find_roots(v, region, WronskianKind::Gamma).roots) {
    out.push_back(eigenmode(v, r.omega, WronskianKind::Gamma, grid));
  }
  return out;
}

// A random smooth state obeying ψ²(±a) = ∓∂ₓψ¹(±a) exactly.
TwoComponentState random_gamma_member(const Grid& g, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Complex c1[4], c2[4];
  for (int k = 0; k < 4; ++k) {
    c1[k] = {n(rng), n(rng)};
    c2[k] = {n(rng), n(rng)};
  }
  auto psi1 = [&](double x) {
    Complex s{};
    for (int k = 0; k < 4; ++k) s += c1[k] * std::cos(0.5 * (k + 1.0) * x + 0.3 * k);
    return s;
  };
  auto dpsi1 = [&](double x) {
    Complex s{};
    for (int k = 0; k < 4; ++k) s -= 0.5 * (k + 1.0) * c1[k] * std::sin(0.5 * (k + 1.0) * x + 0.3 * k);
    return s;
  };
  auto raw2 = [&](double x) {
    Complex s{};
    for (int k = 0; k < 4; ++k) s += c2[k] * std::sin(0.7 * (k + 1.0) * x - 0.2 * k);
    return s;
  };
  const double lo = g.lo();
  const double hi = g.hi();
  const Complex fix_lo = dpsi1(lo) - raw2(lo);
  const Complex fix_hi = -dpsi1(hi) - raw2(hi);
  TwoComponentState s;
  s.grid = g;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g[i];
    const double t = (x - lo) / (hi - lo);
    s.psi1.push_back(psi1(x));
    s.psi2.push_back(raw2(x) + (1.0 - t) * fix_lo + t * fix_hi);
  }
  return s;
}

}  // namespace

TEST_CASE("eigenmodes satisfy their boundary conditions") {
  const auto v = square_barrier(0.16);
  const auto m = eigenmode(v, zero_mode(0.16, 0.05, 0.5));
  CHECK(m.classification == ModeClass::ZeroMode);
  CHECK(m.boundary_residual() < 1e-10);
  const auto t = find_roots(multi_step_barrier(), Rect{-0.5, 0.5, -3.0, 0.2}, WronskianKind::TTM_L);
  REQUIRE(!t.roots.empty());
  const auto ttm = eigenmode(multi_step_barrier(), t.roots.front().omega, WronskianKind::TTM_L);
  CHECK(ttm.classification == ModeClass::TTM);
  CHECK(ttm.boundary_residual() < 1e-10);
  CHECK(ttm.left_slope() == kI * ttm.omega);
}

TEST_CASE("norm is independent of the evaluation boundary") {
  const auto v = square_barrier(0.16);
  const auto m = eigenmode(v, zero_mode(0.16, 0.05, 0.5));
  const Complex n0 = qnm_norm(m, -1.0, 1.0);
  CHECK(rel(qnm_norm(m, -2.0, 3.0), n0) < 1e-8);
  CHECK(rel(qnm_norm(m, -1.5, 1.0), n0) < 1e-8);

  const auto q = find_roots(v, Rect{1.0, 4.0, -3.0, -0.05}, WronskianKind::Gamma);
  REQUIRE(!q.roots.empty());
  const auto qm = eigenmode(v, q.roots.front().omega);
  CHECK(rel(qnm_norm(qm, -1.7, 2.4), qnm_norm(qm)) < 1e-8);

  const auto ms = find_roots(multi_step_barrier(), Rect{-0.5, 0.5, 0.1, 1.0}, WronskianKind::Gamma);
  REQUIRE(ms.roots.size() == 1);
  const auto nm = eigenmode(multi_step_barrier(), ms.roots.front().omega);
  CHECK(nm.classification == ModeClass::NM);
  const Complex inf = qnm_norm(nm, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  CHECK(rel(inf, qnm_norm(nm)) < 1e-8);
  CHECK(rel(qnm_norm(nm, -3.0, 2.0), qnm_norm(nm)) < 1e-8);
  // with the boundaries at infinity only 2ω∫φ² over the line remains
  std::vector<Complex> sq(nm.phi.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = nm.phi[i] * nm.phi[i];
  const double k = nm.omega.imag();
  const Complex tails = (sq.front() + sq.back()) / (2.0 * k);
  CHECK(rel(2.0 * nm.omega * (integrate(nm.grid, sq) + tails), inf) < 1e-12);
  CHECK_THROWS_AS((void)qnm_norm(m, -std::numeric_limits<double>::infinity(), 1.0), InvalidInput);
}

TEST_CASE("pairing of the one-sided solutions is minus dJ/domega at every simple root") {
  for (const auto& v : {square_barrier(0.16), multi_step_barrier()}) {
    const auto rep = find_roots(v, Rect{-6.0, 6.0, -3.0, 0.7}, WronskianKind::Gamma);
    REQUIRE(rep.roots.size() >= 3);
    const auto grid = Grid::for_potential(v);
    for (const auto& r : rep.roots) {
      const auto f = mode_from_solution(solve(v, r.omega, BoundaryKind::OutgoingLeft, grid), WronskianKind::Gamma);
      const auto g = mode_from_solution(solve(v, r.omega, BoundaryKind::OutgoingRight, grid), WronskianKind::Gamma);
      const Jet j = wronskian(v, r.omega, WronskianKind::Gamma);
      CHECK(rel(mode_pairing(f, g), -j.d1) < 1e-8);
    }
  }
}

TEST_CASE("bilinear map: self-pairing, symmetry and orthogonality") {
  const auto v = multi_step_barrier();
  const auto grid = Grid::for_potential(v);
  const auto modes = modes_of(v, Rect{-5.0, 5.0, -3.0, 0.7}, grid);
  REQUIRE(modes.size() >= 6);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto ek = eigenstate(modes[k]);
    CHECK(rel(bilinear_map(ek, ek), qnm_norm(modes[k])) < 1e-10);
    for (std::size_t j = 0; j < k; ++j) {
      const auto ej = eigenstate(modes[j]);
      CHECK(bilinear_map(ek, ej) == bilinear_map(ej, ek));
      const double scale = std::sqrt(norm_scale(modes[k]) * norm_scale(modes[j]));
      CHECK(std::abs(bilinear_map(ek, ej)) <= 1e-6 * scale);
    }
  }
  CHECK_THROWS_AS((void)bilinear_map(eigenstate(modes[0]), eigenstate(eigenmode(square_barrier(0.16), Complex{0, -1}))),
                  InvalidInput);
}

TEST_CASE("normal mode and zero mode of opposite-sign frequency pair only through surface terms") {
  const auto v = multi_step_barrier();
  const auto nm = find_roots(v, Rect{-0.5, 0.5, 0.1, 1.0}, WronskianKind::Gamma).roots.at(0).omega;
  const auto zm = find_roots(v, Rect{-0.1, 0.1, -2.0, -1.0}, WronskianKind::Gamma).roots.at(0).omega;
  const auto a = eigenmode(v, nm);
  const auto b = eigenmode(v, zm);
  const double scale = std::sqrt(norm_scale(a) * norm_scale(b));
  CHECK(std::abs(bilinear_map(eigenstate(a), eigenstate(b))) <= 1e-6 * scale);
}

TEST_CASE("hamiltonian action") {
  const auto v = multi_step_barrier();
  const auto grid = Grid::for_potential(v);
  SUBCASE("eigenstates are eigenvectors") {
    for (const auto& m : modes_of(v, Rect{-4.0, 4.0, -2.0, 0.7}, grid)) {
      const auto e = eigenstate(m);
      const auto h = hamiltonian_action(e, v);
      double err = 0.0;
      double size = 0.0;
      for (std::size_t i = 0; i < e.psi1.size(); ++i) {
        err = std::max({err, std::abs(h.psi1[i] - m.omega * e.psi1[i]), std::abs(h.psi2[i] - m.omega * e.psi2[i])});
        size = std::max({size, std::abs(m.omega * e.psi1[i]), std::abs(m.omega * e.psi2[i])});
      }
      CHECK(err <= 1e-6 * size);
      CHECK(gamma_membership_residual(e) < 1e-8);
    }
  }
  SUBCASE("zero state") {
    TwoComponentState z{grid, std::vector<Complex>(grid.size()), std::vector<Complex>(grid.size()), {}};
    const auto h = hamiltonian_action(z, v);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(h.psi1[i] == Complex{});
      CHECK(h.psi2[i] == Complex{});
    }
  }
  SUBCASE("property: symmetric on random members of the outgoing state space") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const auto a = random_gamma_member(grid, rng);
      const auto b = random_gamma_member(grid, rng);
      const Complex lhs = bilinear_map(hamiltonian_action(a, v), b);
      const Complex rhs = bilinear_map(a, hamiltonian_action(b, v));
      CHECK(std::abs(lhs - rhs) <= 1e-8 * (std::abs(lhs) + std::abs(rhs)));
    }
  }
}

TEST_CASE("expansion coefficients") {
  const auto v = square_barrier(0.16);
  const auto grid = Grid::for_potential(v);
  const auto modes = modes_of(v, Rect{-8.0, 8.0, -4.0, 0.5}, grid);
  REQUIRE(modes.size() >= 6);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto e = eigenstate(modes[k]);
    const auto a = expansion_coeffs(e, modes);
    for (std::size_t j = 0; j < modes.size(); ++j) {
      if (j == k) CHECK(rel(a[j], 1.0) < 1e-10);
      else CHECK(std::abs(a[j]) <= 1e-6);
    }
    auto scaled = e;
    const Complex lambda{0.3, -1.7};
    for (auto& p : scaled.psi1) p *= lambda;
    for (auto& p : scaled.psi2) p *= lambda;
    const auto b = expansion_coeffs(scaled, modes);
    for (std::size_t j = 0; j < modes.size(); ++j) CHECK(std::abs(b[j] - lambda * a[j]) <= 1e-12 * std::abs(lambda));
  }
}

TEST_CASE("partial expansion sums of a smooth bump converge") {
  const auto v = square_barrier(0.16);
  const auto grid = Grid::for_potential(v, 1025);
  TwoComponentState s;
  s.grid = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double c = std::cos(0.5 * kPi * grid[i]);
    s.psi1.push_back(c * c * c * c);
    s.psi2.push_back(0.0);
  }
  auto all = modes_of(v, Rect{-60.0, 60.0, -6.0, 0.5}, grid);
  std::sort(all.begin(), all.end(), [](const ModeFunction& a, const ModeFunction& b) {
    return std::abs(a.omega) < std::abs(b.omega);
  });
  REQUIRE(all.size() >= 40);
  double prev = std::numeric_limits<double>::infinity();
  for (const std::size_t count : {10u, 20u, 40u}) {
    const std::vector<ModeFunction> some(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    const auto sum = expansion_sum(expansion_coeffs(s, some), some);
    std::vector<double> err(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) err[i] = std::norm(sum[i] - s.psi1[i]);
    const double l2 = std::sqrt(integrate(grid, err));
    MESSAGE(count << " modes: L2 error " << l2);
    CHECK(l2 < prev);
    prev = l2;
  }
  CHECK(prev < 0.1);
}

TEST_CASE("expansion refuses zero-norm modes") {
  const double vstar = oracle::coalescence_height();
  const auto v = square_barrier(vstar);
  const auto m = eigenmode(v, Complex{0.0, -1.0});
  CHECK(is_zero_norm(m, 1e-6));
  TwoComponentState s = eigenstate(m);
  CHECK_THROWS_AS((void)expansion_coeffs(s, {m}), JordanBlockError);
  CHECK_THROWS_AS((void)first_order_shift(m, square_barrier(1.0)), JordanBlockError);
}

TEST_CASE("first-order eigenvalue shift") {
  const auto v = square_barrier(0.16);
  const auto m = eigenmode(v, zero_mode(0.16, 0.05, 0.5));
  CHECK(first_order_shift(m, Potential::zero(1.0)).delta_omega == Complex{});
  const auto one = first_order_shift(m, square_barrier(1e-3));
  const auto two = first_order_shift(m, square_barrier(2e-3));
  CHECK(rel(two.delta_omega, 2.0 * one.delta_omega) < 1e-12);
  CHECK(rel(one.delta_omega_sq, 2.0 * m.omega * one.delta_omega) < 1e-15);

  // against re-found roots of the raised barrier
  double errs[2];
  int k = 0;
  for (const double eps : {1e-3, 5e-4}) {
    const double g = oracle::even_zero_mode(0.16 + eps, 1.0, 0.05, 0.5);
    const Complex w{0.0, -g};
    const Complex exact = w * w - m.omega * m.omega;
    errs[k++] = std::abs(first_order_shift(m, square_barrier(eps)).delta_omega_sq - exact);
  }
  CHECK(errs[0] / errs[1] >= 2.5);
  CHECK(errs[0] / errs[1] <= 6.0);

  // a perturbation confined to half the interval
  const auto half = Potential::piecewise_constant({{-1.0, 0.0, 0.0}, {0.0, 1.0, 1e-3}});
  CHECK_THROWS_AS((void)first_order_shift(m, half), InvalidInput);
  const auto split = eigenmode(v, m.omega, WronskianKind::Gamma, Grid::piecewise({-1.0, 0.0, 1.0}, {2048, 2048}));
  CHECK(rel(first_order_shift(split, half).delta_omega, 0.5 * one.delta_omega) < 1e-10);
}

TEST_CASE("nodes and antinodes") {
  SUBCASE("cosh profile") {
    ModeFunction m;
    m.omega = Complex{0.0, -0.5};
    m.grid = Grid::uniform(-1.0, 1.0, 400);
    const double al = 0.7;
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
      m.phi.push_back(std::cosh(al * m.grid[i]));
      m.dphi.push_back(al * std::sinh(al * m.grid[i]));
    }
    const auto n = count_nodes_antinodes(m, Potential::zero(1.0));
    CHECK(n.nodes == 0);
    CHECK(n.antinodes == 1);
    CHECK(!n.complex_zeros);
  }
  SUBCASE("even zero modes of the square barrier") {
    const auto v = square_barrier(0.16);
    for (const Complex w : {zero_mode(0.16, 0.05, 0.5), zero_mode(0.16, 2.0, 3.0)}) {
      const auto n = count_nodes_antinodes(eigenmode(v, w), v);
      CHECK(n.nodes == 0);
      CHECK(!n.boundary_node);
    }
  }
  SUBCASE("a vanishing left end is flagged") {
    ModeFunction m;
    m.omega = Complex{0.0, -1.0};
    m.grid = Grid::uniform(-1.0, 1.0, 200);
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
      m.phi.push_back(std::sin(kPi * (m.grid[i] + 1.0) / 4.0));
      m.dphi.push_back(kPi / 4.0 * std::cos(kPi * (m.grid[i] + 1.0) / 4.0));
    }
    const auto n = count_nodes_antinodes(m, Potential::zero(1.0));
    CHECK(n.boundary_node);
    CHECK(n.nodes == 1);
  }
  SUBCASE("oscillating quasinormal modes of repulsive potentials") {
    for (const auto& v : {square_barrier(0.16), square_barrier(4.0)}) {
      const auto grid = Grid::for_potential(v);
      int seen = 0;
      for (const auto& m : modes_of(v, Rect{-12.0, 12.0, -4.0, 0.5}, grid)) {
        if (std::abs(m.omega.real()) <= tol_axis(m.omega)) continue;
        const auto n = count_nodes_antinodes(m, v);
        CHECK(n.complex_zeros);
        CHECK(n.nodes <= 1);
        CHECK(n.antinodes <= 1);
        ++seen;
      }
      CHECK(seen >= 4);
    }
  }
}

TEST_CASE("zero-mode surface identity") {
  const auto v = square_barrier(0.16);
  const auto m1 = eigenmode(v, zero_mode(0.16, 0.05, 0.5));
  const auto m2 = eigenmode(v, zero_mode(0.16, 2.0, 3.0));
  const auto s = zero_mode_surface_identity(m1, m2);
  CHECK(s.residual <= 1e-8 * s.scale);
  // both modes are nodeless and positive, yet the identity holds
  const auto self = zero_mode_surface_identity(m1, m1);
  CHECK(self.residual > 1e-3 * self.scale);
  const auto q = find_roots(v, Rect{1.0, 4.0, -3.0, -0.05}, WronskianKind::Gamma);
  CHECK_THROWS_AS((void)zero_mode_surface_identity(m1, eigenmode(v, q.roots.at(0).omega)), InvalidInput);
}

TEST_CASE("normalization") {
  const auto v = multi_step_barrier();
  const auto grid = Grid::for_potential(v);
  auto modes = modes_of(v, Rect{-4.0, 4.0, -2.0, 0.7}, grid);
  for (auto& m : modes) m = normalize(m);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    CHECK(rel(*modes[k].norm, 2.0 * modes[k].omega) < 1e-12);
    CHECK(modes[k].phi.front().real() >= 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(std::abs(bilinear_map(eigenstate(modes[k]), eigenstate(modes[j]))) <= 1e-6 * std::abs(modes[k].omega));
    }
  }
}
