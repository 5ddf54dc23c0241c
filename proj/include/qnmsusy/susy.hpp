#pragma once

#include <string>
#include <vector>

#include "qnmsusy/errors.hpp"
#include "qnmsusy/modes.hpp"

namespace qnmsusy {

/// Asymptotics of a generator beyond one end: decreasing away from the
/// support (D) or increasing (I).
enum class EndType { D, I };
[[nodiscard]] const char* to_string(EndType e);
/// "DD", "II", "DI" or "ID" (left end first).
[[nodiscard]] std::string end_type_label(EndType left, EndType right);

/// Φ with W = -Φ'/Φ on its grid. Ω is the eigenvalue of Φ (Ω² = -K²).
struct Generator {
  ModeFunction phi;
  Complex omega;
  double omega_sq = 0.0;
  double K = 0.0;
  std::vector<double> W;
  double W_minus = 0.0;
  double W_plus = 0.0;
  EndType left = EndType::I;
  EndType right = EndType::I;
  int chi = 0;

  [[nodiscard]] std::string type() const { return end_type_label(left, right); }
};

/// Checks eligibility and builds W. W at ±a is the exact exterior value ∓K or
/// ±K; a mode whose integrated slope at either end misses ±K by more than
/// 1e-6 K² (in W² + Ω²) is mixed type. Throws IneligibleGenerator.
[[nodiscard]] Generator build_generator(const ModeFunction& mode);

struct RejectedCandidate {
  Complex omega;
  WronskianKind kind = WronskianKind::Gamma;
  IneligibleGenerator::Reason reason = IneligibleGenerator::Reason::Node;
  std::string message;
};

struct Candidates {
  std::vector<Generator> eligible;
  std::vector<RejectedCandidate> rejected;
};

/// Imaginary-axis zeros of the Gamma, TTM_L and TTM_R Wronskians inside the
/// region (ω = 0 excluded), each tried as a generator.
[[nodiscard]] Candidates candidate_generators(const Potential& v, const Rect& region,
                                              std::size_t points = kDefaultGridPoints);

/// Ṽ = 2(W² + Ω²) - V sampled on the generator's grid, one sampled piece per
/// grid piece, so jumps of V stay jumps of Ṽ. V must not jump inside a piece.
[[nodiscard]] Potential partner_potential(const Generator& gen, const Potential& v);

/// (∂ₓ + W) and (-∂ₓ + W) applied to a function given with its derivative.
[[nodiscard]] std::vector<Complex> apply_A(const Generator& gen, const std::vector<Complex>& f,
                                           const std::vector<Complex>& df);
[[nodiscard]] std::vector<Complex> apply_A_adjoint(const Generator& gen, const std::vector<Complex>& f,
                                                   const std::vector<Complex>& df);

struct MappedMode {
  ModeFunction mode;
  /// The input was proportional to Φ, so Aφ vanished.
  bool annihilated = false;
};

/// φ̃ = φ' + Wφ, φ̃' = (W² + Ω² - ω²)φ + Wφ'.
[[nodiscard]] MappedMode map_state(const Generator& gen, const ModeFunction& m);
/// (ω² - Ω²)^{-1/2} Aφ, which keeps the generalized norm. Throws
/// ExcludedSubspaceError within 1e-6 of ±iK and ConsistencyError when the norm
/// is not preserved to 1e-6.
[[nodiscard]] ModeFunction map_state_normalized(const Generator& gen, const ModeFunction& m);

/// (∂ₓ + W) on both components, derivatives by fourth-order differences.
[[nodiscard]] TwoComponentState map_twocomponent(const Generator& gen, const TwoComponentState& s);
/// (-∂ₓ + W) on both components.
[[nodiscard]] TwoComponentState map_twocomponent_adjoint(const Generator& gen, const TwoComponentState& s);

/// Φ̃ = 1/Φ with W ↦ -W, D ↔ I and χ ↦ -χ, as a mode of the partner.
[[nodiscard]] Generator reverse_generator(const Generator& gen);

/// max |Φ'' - (V - Ω²)Φ| / max |(V - Ω²)Φ|, with Φ'' by differences.
[[nodiscard]] double generator_residual(const Generator& gen, const Potential& v);

struct SpectralLedger {
  int chi = 0;
  int delta_plus = 0;   // Δ(iK) = n(iK) - ñ(iK)
  int delta_minus = 0;  // Δ(-iK)
  int n_plus = 0, n_minus = 0, nt_plus = 0, nt_minus = 0;
  double radius = 0.0;  // half-size of the counting squares
};

/// Δ(±iK) from contour counts on V and Ṽ. Throws ConsistencyError unless
/// Δ(iK) = -Δ(-iK) = χ.
[[nodiscard]] SpectralLedger spectral_ledger(const Generator& gen, const Potential& v, const Potential& v_tilde);
[[nodiscard]] SpectralLedger spectral_ledger(const Generator& gen, const Potential& v);

struct IntertwiningCheck {
  double max_residual = 0.0;
  int used = 0;
  int skipped = 0;
  Complex omega_eff;  // iχK
};

/// max |(ω - Ω)J̃ - (ω + Ω)J| / |(ω + Ω)J| over the samples with Ω = iχK.
/// Samples within 1e-3 of ±iK or where J or J̃ nearly vanishes are skipped.
[[nodiscard]] IntertwiningCheck verify_intertwining(const Potential& v, const Potential& v_tilde,
                                                    const Generator& gen, const std::vector<Complex>& samples,
                                                    const WronskianOptions& wopt = {});

/// J̃ᵘ = f̃'g̃ - f̃g̃' with f̃ = Af, g̃ = Ag built from the solutions on V (the
/// generator's own potential), at the grid node nearest x = 0.
[[nodiscard]] Jet unnormalized_partner_wronskian(const Generator& gen, const Potential& v, Complex omega,
                                                 WronskianKind kind = WronskianKind::Gamma);

}  // namespace qnmsusy
