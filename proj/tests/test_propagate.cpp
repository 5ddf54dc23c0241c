#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qnmsusy/errors.hpp"
#include "qnmsusy/propagate.hpp"

using namespace qnmsusy;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("free field outgoing-left solution is a plane wave") {
  const Complex w{1.3, -0.4};
  const auto sol = solve(Potential::zero(1.0), w, BoundaryKind::OutgoingLeft, Grid::uniform(-1.0, 1.0, 64));
  double worst = 0.0;
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    const double s = sol.grid[i] + 1.0;
    const Complex e = std::exp(-kI * w * s);
    worst = std::max(worst, rel(sol.phi[i], e));
    worst = std::max(worst, rel(sol.dphi_dx[i], -kI * w * e));
    worst = std::max(worst, rel(sol.dphi_domega[i], -kI * s * e));
    if (s > 0.0) worst = std::max(worst, rel(sol.d2phi_domega2[i], -s * s * e));
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("seeded end matches the boundary kind exactly") {
  const Complex w{0.7, -0.2};
  const auto v = multi_step_barrier();
  struct Case {
    BoundaryKind kind;
    std::size_t end;
    Complex slope;
  };
  const std::size_t last = Grid::for_potential(v).size() - 1;
  for (const auto& c : {Case{BoundaryKind::OutgoingLeft, 0, -kI}, Case{BoundaryKind::OutgoingRight, last, kI},
                        Case{BoundaryKind::IncomingLeft, 0, kI}, Case{BoundaryKind::IncomingRight, last, -kI}}) {
    const auto sol = solve(v, w, c.kind);
    CHECK(sol.phi[c.end] == Complex{1.0, 0.0});
    CHECK(std::abs(sol.dphi_dx[c.end] - c.slope * w) == 0.0);
    CHECK(sol.dphi_domega[c.end] == Complex{});
    CHECK(sol.ddphi_domega_dx[c.end] == c.slope);
    CHECK(sol.d2phi_domega2[c.end] == Complex{});
    CHECK(sol.d2dphi_domega2_dx[c.end] == Complex{});
  }
}

TEST_CASE("square-barrier zero mode is outgoing at the far end") {
  const double g = oracle::even_zero_mode(0.16, 1.0, 0.05, 0.5);
  CHECK(g == doctest::Approx(0.181).epsilon(2e-3 / 0.181));
  const Complex w{0.0, -g};
  const auto end = propagate_to(square_barrier(0.16), w, BoundaryKind::OutgoingLeft, 1.0);
  CHECK(std::abs(end.dphi.v / end.phi.v - kI * w) < 1e-12);

  const Complex quoted{0.0, -0.181};
  const auto near = propagate_to(square_barrier(0.16), quoted, BoundaryKind::OutgoingLeft, 1.0);
  CHECK(std::abs(near.dphi.v / near.phi.v - kI * quoted) < 2e-3);
}

TEST_CASE("segment_step closed forms") {
  const auto m0 = segment_step(0.3, Complex{1e-9, 0.0}, 1e-6);
  CHECK(std::abs(m0(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(m0(1, 1) - 1.0) < 1e-12);
  CHECK(std::abs(m0(0, 1) - 1e-6) < 1e-18);
  CHECK(std::abs(m0(1, 0) - 0.3e-6) < 1e-18);

  const Complex w{2.1, -0.3};
  const double dx = 0.37;
  const auto m = segment_step(0.0, w, dx);
  CHECK(rel(m(0, 0), std::cos(w * dx)) < 1e-14);
  CHECK(rel(m(0, 1), std::sin(w * dx) / w) < 1e-14);
  CHECK(rel(m(1, 0), -w * std::sin(w * dx)) < 1e-14);

  for (const Complex om : {Complex{0.1, 0.2}, Complex{5.0, -3.0}, Complex{0.0, -2.0}, Complex{0.4, 0.0}}) {
    for (double v0 : {-10.0, 0.0, 0.16, 7.0}) {
      const auto s = segment_step(v0, om, 0.9);
      CHECK(std::abs(s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0) - 1.0) < 1e-12);
      // κ and -κ give the same matrix
      const Complex k = std::sqrt(om * om - v0);
      const auto a = segment_step_kappa(k, 0.9);
      const auto b = segment_step_kappa(-k, 0.9);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(a.m[i] - b.m[i]) <= 1e-15 * (1.0 + std::abs(a.m[i])));
    }
  }
  CHECK_THROWS_AS((void)segment_step(0.0, 1.0, 0.0), InvalidInput);
}

TEST_CASE("composed segment steps reproduce solve") {
  const auto v = multi_step_barrier();
  const Complex w{3.2, -0.7};
  const auto sol = solve(v, w, BoundaryKind::OutgoingLeft);
  std::array<Complex, 2> y{1.0, -kI * w};
  for (const auto& s : v.segments()) y = segment_step(s.value, w, s.x_hi - s.x_lo) * y;
  CHECK(rel(sol.phi.back(), y[0]) < 1e-12);
  CHECK(rel(sol.dphi_dx.back(), y[1]) < 1e-12);
}

TEST_CASE("reality on the imaginary axis") {
  const auto free = solve(Potential::zero(1.0), Complex{0.0, -0.5}, BoundaryKind::OutgoingLeft);
  CHECK(solution_reality_check(free) == 0.0);
  CHECK(std::abs(free.phi.back() - std::exp(-1.0)) < 1e-12);

  const auto sq = solve(square_barrier(0.16), Complex{0.0, -0.181}, BoundaryKind::OutgoingLeft);
  CHECK(solution_reality_check(sq) < 1e-12);

  const auto zero = solve(square_barrier(0.16), Complex{}, BoundaryKind::OutgoingLeft);
  CHECK(solution_reality_check(zero) == 0.0);

  CHECK_THROWS_AS((void)solution_reality_check(solve(Potential::zero(1.0), Complex{0.1, -0.5},
                                                BoundaryKind::OutgoingLeft, 16)),
                  InvalidInput);
}

TEST_CASE("frequency derivatives match centred differences") {
  const auto v = multi_step_barrier();
  const Complex w{1.7, -0.45};
  for (auto kind : {BoundaryKind::OutgoingLeft, BoundaryKind::IncomingRight}) {
    const auto x = 0.3;
    const auto s = propagate_to(v, w, kind, x);
    double prev = 0.0;
    for (double h : {1e-2, 5e-3}) {
      const auto p = propagate_to(v, w + h, kind, x);
      const auto m = propagate_to(v, w - h, kind, x);
      const Complex d1 = (p.phi.v - m.phi.v) / (2.0 * h);
      const Complex d2 = (p.phi.v - 2.0 * s.phi.v + m.phi.v) / (h * h);
      const Complex dd1 = (p.dphi.v - m.dphi.v) / (2.0 * h);
      const double err = std::abs(d1 - s.phi.d1) + std::abs(d2 - s.phi.d2) + std::abs(dd1 - s.dphi.d1);
      if (prev > 0.0) CHECK(err < 0.3 * prev);  // O(h²): ratio ~ 1/4
      prev = err;
    }
    CHECK(prev < 1e-3);
  }
}

TEST_CASE("outgoing at -omega equals incoming at omega") {
  const auto v = multi_step_barrier();
  const Complex w{2.5, -0.6};
  const auto out = solve(v, -w, BoundaryKind::OutgoingLeft);
  const auto in = solve(v, w, BoundaryKind::IncomingLeft);
  CHECK(out.phi == in.phi);
  CHECK(out.dphi_dx == in.dphi_dx);
  const auto outr = solve(v, -w, BoundaryKind::OutgoingRight);
  const auto inr = solve(v, w, BoundaryKind::IncomingRight);
  CHECK(outr.phi == inr.phi);
}

TEST_CASE("sampled potentials agree with a fine RK4 reference") {
  auto smooth = [](double x) { return 2.0 * std::exp(-4.0 * x * x) - 0.5 * x; };
  const std::size_t cells = 512;
  std::vector<double> vals(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) vals[k] = smooth(-1.0 + 2.0 * static_cast<double>(k) / cells);
  const auto v = Potential::sampled_uniform(1.0, vals);
  const Complex w{1.1, -0.8};
  // the reference integrates the same piecewise-linear function
  auto lin = [&v](double x) { return v(x); };
  const auto s = propagate_to(v, w, BoundaryKind::OutgoingLeft, 1.0);
  const auto [p, dp] = oracle::rk4(lin, w, 1.0, -kI * w, -1.0, 1.0, cells * 16);
  CHECK(rel(s.phi.v, p) < 1e-9);
  CHECK(rel(s.dphi.v, dp) < 1e-9);

  // fourth order in the step for a potential linear over each cell
  const auto lin_v = Potential::sampled_uniform(1.0, {3.0, -2.0});
  const auto [pe, dpe] = oracle::rk4([&lin_v](double x) { return lin_v(x); }, w, 1.0, -kI * w, -1.0, 1.0, 20000);
  double prev = 0.0;
  for (std::size_t n : {1, 2, 4}) {
    std::vector<double> vv(n * 8 + 1);
    for (std::size_t k = 0; k < vv.size(); ++k) vv[k] = 3.0 - 5.0 * static_cast<double>(k) / (vv.size() - 1);
    const auto e = propagate_to(Potential::sampled_uniform(1.0, vv), w, BoundaryKind::OutgoingLeft, 1.0);
    const double err = std::abs(e.phi.v - pe);
    if (prev > 0.0) CHECK(prev / err > 12.0);
    prev = err;
  }
}

TEST_CASE("overflow is reported with the last good abscissa") {
  const Complex w{0.0, -400.0};
  try {
    (void)solve(Potential::zero(1.0), w, BoundaryKind::OutgoingLeft, 4096);
    FAIL("expected a propagation error");
  } catch (const PropagationError& e) {
    CHECK(e.last_good_x() > -1.0);
    CHECK(e.last_good_x() < 1.0);
  }
}
