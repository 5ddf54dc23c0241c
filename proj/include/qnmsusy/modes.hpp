#pragma once

#include <optional>
#include <vector>

#include "qnmsusy/grid.hpp"
#include "qnmsusy/potential.hpp"
#include "qnmsusy/propagate.hpp"
#include "qnmsusy/spectrum.hpp"

namespace qnmsusy {

/// An eigenfunction sampled on a grid, with the boundary conditions it obeys.
struct ModeFunction {
  Complex omega;
  ModeClass classification = ModeClass::QNM;
  WronskianKind kind = WronskianKind::Gamma;
  Grid grid;
  std::vector<Complex> phi;
  std::vector<Complex> dphi;
  std::optional<Complex> norm;

  /// Exterior slopes φ'/φ continuing the mode beyond -a and +a.
  [[nodiscard]] Complex left_slope() const;
  [[nodiscard]] Complex right_slope() const;
  /// Largest relative mismatch of φ' against the exterior slopes at ±a.
  [[nodiscard]] double boundary_residual() const;
};

/// f(ω, x) integrated from the left end with the left boundary condition of
/// `kind`; an eigenmode when ω is a zero of that Wronskian.
[[nodiscard]] ModeFunction eigenmode(const Potential& v, Complex omega, WronskianKind kind = WronskianKind::Gamma,
                                     std::size_t points = kDefaultGridPoints);
[[nodiscard]] ModeFunction eigenmode(const Potential& v, Complex omega, WronskianKind kind, const Grid& grid);
/// The mode from an arbitrary one-sided solution (f or g).
[[nodiscard]] ModeFunction mode_from_solution(const WaveSolution& s, WronskianKind kind);

/// ψ¹ = ψ and ψ² = ∂ₜψ on a grid. psi2_left holds the left-hand limits of ψ²
/// at interior piece joints when ψ² jumps there (empty when continuous).
struct TwoComponentState {
  Grid grid;
  std::vector<Complex> psi1;
  std::vector<Complex> psi2;
  std::vector<Complex> psi2_left;
};

/// (φ, -iωφ).
[[nodiscard]] TwoComponentState eigenstate(const ModeFunction& m);

/// 2ω∫φ₁φ₂ dx + i[φ₁φ₂(b₋) + φ₁φ₂(b₊)] over [b₋, b₊] ⊇ [-a, a]; the parts
/// outside [-a, a] use the exact exponential continuation. b± may be
/// infinite when the continuation decays (normal modes).
[[nodiscard]] Complex mode_pairing(const ModeFunction& m1, const ModeFunction& m2, double b_minus, double b_plus);
[[nodiscard]] Complex mode_pairing(const ModeFunction& m1, const ModeFunction& m2);
[[nodiscard]] Complex qnm_norm(const ModeFunction& m, double b_minus, double b_plus);
[[nodiscard]] Complex qnm_norm(const ModeFunction& m);
/// Size of the terms that make up the norm, for relative tolerances.
[[nodiscard]] double norm_scale(const ModeFunction& m);
[[nodiscard]] bool is_zero_norm(const ModeFunction& m, double rel_tol = 1e-8);

/// i{∫[ψ¹φ² + ψ²φ¹] dx + ψ¹(-a)φ¹(-a) + ψ¹(a)φ¹(a)}.
[[nodiscard]] Complex bilinear_map(const TwoComponentState& psi, const TwoComponentState& phi);
/// i(ψ², ψ¹'' - Vψ¹) with ψ¹'' from fourth-order differences.
[[nodiscard]] TwoComponentState hamiltonian_action(const TwoComponentState& s, const Potential& v);
/// max over both ends of |ψ²(±a) ± ∂ₓψ¹(±a)| / scale, using differences for ∂ₓψ¹.
[[nodiscard]] double gamma_membership_residual(const TwoComponentState& s);

/// aⱼ = (𝛟ⱼ, ψ) / (𝛟ⱼ, 𝛟ⱼ). Throws JordanBlockError for a zero-norm mode.
[[nodiscard]] std::vector<Complex> expansion_coeffs(const TwoComponentState& s,
                                                    const std::vector<ModeFunction>& modes);
/// Σ aⱼ φⱼ (first component of the expansion at t = 0).
[[nodiscard]] std::vector<Complex> expansion_sum(const std::vector<Complex>& coeffs,
                                                 const std::vector<ModeFunction>& modes);

struct FirstOrderShift {
  Complex delta_omega;     // ∫φ²ΔV / (φ,φ)
  Complex delta_omega_sq;  // 2ω Δω
};
/// Throws JordanBlockError for a zero-norm mode.
[[nodiscard]] FirstOrderShift first_order_shift(const ModeFunction& m, const Potential& dv);

struct NodeCount {
  int nodes = 0;
  int antinodes = 0;
  /// Sign changes of Re and Im of φ and φ' (after the phase rotation).
  int re_nodes = 0, re_antinodes = 0, im_nodes = 0, im_antinodes = 0;
  /// φ(-a) vanished, so the phase could not be fixed there; counted as a node.
  bool boundary_node = false;
  /// True when nodes/antinodes are complex zeros (Re ω ≠ 0), false when
  /// they are sign changes of the phase-rotated real function.
  bool complex_zeros = false;
};

/// Imaginary-axis modes: rotate so φ(-a) > 0 and count sign changes of φ and
/// φ' with a dead band of 1e-9 max|·|. Other modes: count points where the
/// complex φ (node) or φ' (antinode) vanishes, found on the cubic Hermite
/// interpolant of each cell. V supplies φ'' = (V - ω²)φ.
[[nodiscard]] NodeCount count_nodes_antinodes(const ModeFunction& m, const Potential& v);

struct SurfaceIdentity {
  double residual = 0.0;
  double scale = 0.0;
};
/// |-(γ₁+γ₂)∫φ₁φ₂ + φ₁φ₂(-a) + φ₁φ₂(a)| for two zero modes ω = -iγ.
[[nodiscard]] SurfaceIdentity zero_mode_surface_identity(const ModeFunction& m1, const ModeFunction& m2);

/// Scaled so that (φ, φ) = 2ω, sign chosen to make φ(-a) have positive real part.
[[nodiscard]] ModeFunction normalize(ModeFunction m);

}  // namespace qnmsusy
