#pragma once

#include <vector>

#include "qnmsusy/grid.hpp"
#include "qnmsusy/potential.hpp"
#include "qnmsusy/types.hpp"

namespace qnmsusy {

/// Seed conditions at one end of [-a, a]. All kinds set φ = 1 at the seeded end.
///   OutgoingLeft:  φ'(-a) = -iω      OutgoingRight: φ'(a) = +iω
///   IncomingLeft:  φ'(-a) = +iω      IncomingRight: φ'(a) = -iω
enum class BoundaryKind { OutgoingLeft, OutgoingRight, IncomingLeft, IncomingRight };

[[nodiscard]] constexpr bool seeded_left(BoundaryKind k) {
  return k == BoundaryKind::OutgoingLeft || k == BoundaryKind::IncomingLeft;
}
/// The sign s in φ' = s·iω at the seeded end.
[[nodiscard]] constexpr double seed_sign(BoundaryKind k) {
  return (k == BoundaryKind::OutgoingRight || k == BoundaryKind::IncomingLeft) ? 1.0 : -1.0;
}
[[nodiscard]] const char* to_string(BoundaryKind k);

/// (φ, φ') at one abscissa, each carried as a jet in ω.
struct JetState {
  Jet phi;
  Jet dphi;
};

/// One-sided solution on a grid with its first and second ω-derivatives.
struct WaveSolution {
  Complex omega;
  BoundaryKind kind = BoundaryKind::OutgoingLeft;
  Grid grid;
  std::vector<Complex> phi;
  std::vector<Complex> dphi_dx;
  std::vector<Complex> dphi_domega;
  std::vector<Complex> ddphi_domega_dx;
  std::vector<Complex> d2phi_domega2;
  std::vector<Complex> d2dphi_domega2_dx;

  [[nodiscard]] JetState at(std::size_t i) const {
    return {{phi[i], dphi_domega[i], d2phi_domega2[i]}, {dphi_dx[i], ddphi_domega_dx[i], d2dphi_domega2_dx[i]}};
  }
};

/// Exact transfer matrix over a constant-V stretch of length dx > 0.
[[nodiscard]] CMat2 segment_step(double v0, Complex omega, double dx);
/// The same matrix for a given κ; even in κ.
[[nodiscard]] CMat2 segment_step_kappa(Complex kappa, double dx);

/// Fourth-order Magnus propagator (as an ω-jet) from x to x + h for V varying
/// linearly from v_start to v_end over the step; h may be negative. Exact when
/// v_start == v_end.
[[nodiscard]] JetMat2 cell_propagator(double v_start, double v_end, Complex omega, double h);

/// Seed state at the seeded end of the given kind.
[[nodiscard]] JetState seed(BoundaryKind kind, Complex omega);

/// Integrate from the seeded end to x, stepping over the knots of V.
[[nodiscard]] JetState propagate_to(const Potential& v, Complex omega, BoundaryKind kind, double x);

/// propagate_to with the knot list of V cached, for repeated evaluation.
class Propagator {
 public:
  explicit Propagator(Potential v);
  [[nodiscard]] JetState to(Complex omega, BoundaryKind kind, double x) const;
  [[nodiscard]] const Potential& potential() const noexcept { return v_; }

 private:
  Potential v_;
  std::vector<double> knots_;
};

/// Integrate across the whole grid (which must span [-a, a]).
[[nodiscard]] WaveSolution solve(const Potential& v, Complex omega, BoundaryKind kind, const Grid& grid);
[[nodiscard]] WaveSolution solve(const Potential& v, Complex omega, BoundaryKind kind,
                                 std::size_t points = kDefaultGridPoints);
/// solve() with the same (4 s_h - s_2h) / 3 combination as the Wronskian on
/// coarsenable sampled potentials; plain solve() otherwise.
[[nodiscard]] WaveSolution solve_extrapolated(const Potential& v, Complex omega, BoundaryKind kind, const Grid& grid);

/// max |Im φ| over the grid; requires Re ω == 0.
[[nodiscard]] double solution_reality_check(const WaveSolution& sol);

}  // namespace qnmsusy
