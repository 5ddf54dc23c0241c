#pragma once

#include <array>
#include <vector>

#include "qnmsusy/modes.hpp"
#include "qnmsusy/susy.hpp"

namespace qnmsusy {

struct BlockCandidate {
  Complex omega;
  int order = 2;
  /// Two simple roots closer than 1e-4 K, reported as one candidate block.
  bool merged_pair = false;
};

/// Roots of multiplicity ≥ 2, plus pairs of near-coincident simple roots.
[[nodiscard]] std::vector<BlockCandidate> detect_blocks(const SpectrumReport& report);

enum class AlphaPolicy { SmallerRoot, Plain };
[[nodiscard]] const char* to_string(AlphaPolicy p);

/// M = 2 block at a double zero ω of the Γ Wronskian.
///
/// Ψ₀ = s F and Ψ₁ = s ∂ω F + α Ψ₀, where F is the outgoing solution with
/// F(-a) = 1 and s the overall scale. Second components follow the time
/// dependence (Ψ₁ - itΨ₀) e^{-iωt}.
struct JordanBlockBasis {
  Complex omega;
  int order = 2;
  Complex scale;
  ModeFunction psi0;
  std::vector<Complex> psi1;
  std::vector<Complex> dpsi1;
  TwoComponentState state0;
  TwoComponentState state1;
  AlphaPolicy policy = AlphaPolicy::SmallerRoot;
  Complex alpha;
  /// Both solutions of (Ψ₁, Ψ₁) = 0, smaller modulus first.
  std::array<Complex, 2> alpha_roots{};
  Complex norm00;  // (Ψ₀, Ψ₀), zero for a double zero
  Complex norm11;
  Complex block_norm;  // (Ψ₁, Ψ₀)
  /// |d/dω (F' - iωF)| at +a relative to its terms: F stays outgoing to first order.
  double outgoing_residual = 0.0;
  /// max |(H - ω²)Ψ₁ - 2ωΨ₀| / max |2ωΨ₀|.
  double chain_residual = 0.0;
};

/// Throws InvalidInput unless a contour around ω counts exactly two zeros.
[[nodiscard]] JordanBlockBasis build_block_basis(const Potential& v_tilde, Complex omega, const Grid& grid,
                                                 AlphaPolicy policy = AlphaPolicy::SmallerRoot,
                                                 Complex scale = 1.0);
[[nodiscard]] JordanBlockBasis build_block_basis(const Potential& v_tilde, Complex omega,
                                                 AlphaPolicy policy = AlphaPolicy::SmallerRoot,
                                                 Complex scale = 1.0,
                                                 std::size_t points = kDefaultGridPoints);

/// Relative wave-equation residual of (Ψ₁ - itΨ₀) e^{-iωt} at time t.
[[nodiscard]] double time_domain_residual(const JordanBlockBasis& b, const Potential& v_tilde, double t);

/// The block produced when gen (an NM Φ at Ω = iK of H) maps the QNM source
/// at -Ω into a double zero of the partner. The scale is Ψ(-a)(iΩ + W₋), so
/// that Ψ₀ = AΨ.
[[nodiscard]] JordanBlockBasis susy_block_basis(const Generator& gen, const Potential& h, const ModeFunction& source,
                                                AlphaPolicy policy = AlphaPolicy::SmallerRoot);

struct BlockNorm {
  Complex via_bilinear;   // (Ψ₁, Ψ₀) / (Ψ, Ψ)
  Complex via_wronskian;  // [-½ d²J̃ᵘ/dω²] / [-dJ/dω] at -Ω
  Complex expected;       // -2Ω
  double route_difference = 0.0;
};

/// Both routes to the block normalization. Throws ConsistencyError if they
/// differ by more than rel_tol relative.
[[nodiscard]] BlockNorm block_norm(const JordanBlockBasis& b, const Potential& h, const Generator& gen,
                                   const ModeFunction& source, double rel_tol = 1e-6);

struct ReverseAnnihilation {
  double annihilation0 = 0.0;  // |A†Ψ₀| relative to its terms
  Complex c;                   // A†Ψ₁ = cΨ by least squares
  double c_error = 0.0;        // |c + 2Ω| / |2Ω|
  double fit_residual = 0.0;   // |A†Ψ₁ - cΨ| / |A†Ψ₁|
  double eigen_residual = 0.0; // |(H - Ω²)A†Ψ₁| / |Ω² A†Ψ₁|
  double incoming_admixture = 0.0;  // first-order OWC failure of ∂ωf at +a in H
  bool annihilated = false;
  bool c_matches = false;
  bool preimage_not_outgoing = false;
};

[[nodiscard]] ReverseAnnihilation reverse_annihilation(const Generator& gen, const JordanBlockBasis& b,
                                                       const Potential& h, const ModeFunction& source);

struct Proportionality {
  Complex via_left;   // 2iΩΨ(-a)Φ(-a)
  Complex via_right;  // -2iΩΨ(a)Φ(a)
  Complex direct;     // AΨ / Φ⁻¹ at the centre of the grid
  double agreement = 0.0;  // |left - right| / |left|
  double constancy = 0.0;  // max |AΨ - direct Φ⁻¹| / max |AΨ|
  double surface = 0.0;    // |Ψ(-a)Φ(-a) + Ψ(a)Φ(a)| / |Ψ(-a)Φ(-a)|
};

[[nodiscard]] Proportionality proportionality_constant(const Generator& gen, const ModeFunction& source);

}  // namespace qnmsusy
