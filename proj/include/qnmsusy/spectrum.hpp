#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qnmsusy/potential.hpp"
#include "qnmsusy/propagate.hpp"
#include "qnmsusy/types.hpp"

namespace qnmsusy {

/// Which pair of one-sided solutions enters J = f'g - fg'.
///   Gamma: OutgoingLeft  x OutgoingRight  (normal and quasinormal modes)
///   TTM_L: IncomingLeft  x OutgoingRight  (total transmission ~ e^{iωx})
///   TTM_R: OutgoingLeft  x IncomingRight  (total transmission ~ e^{-iωx})
enum class WronskianKind { Gamma, TTM_L, TTM_R };

[[nodiscard]] const char* to_string(WronskianKind k);
[[nodiscard]] WronskianKind wronskian_kind_from_string(const std::string& s);
[[nodiscard]] BoundaryKind left_kind(WronskianKind k);
[[nodiscard]] BoundaryKind right_kind(WronskianKind k);

enum class ModeClass { NM, QNM, ZeroMode, TTM };
[[nodiscard]] const char* to_string(ModeClass c);

inline constexpr double kTolRoot = 1e-10;
[[nodiscard]] inline double tol_axis(Complex w) { return 1e-8 * (1.0 + std::abs(w)); }

struct WronskianOptions {
  double x_match = 0.0;
  /// For sampled potentials with even cell counts: combine J on the samples and
  /// on every second sample as (4 J_h - J_2h) / 3, removing the leading
  /// linear-interpolation error. Ignored for piecewise-constant potentials.
  bool richardson = true;
};

/// f'g - fg' for two states at the same abscissa, as jets in ω.
[[nodiscard]] Jet wronskian_of(const JetState& f, const JetState& g);

/// J(ω) with dJ/dω and d²J/dω² (the jet's v, d1, d2).
[[nodiscard]] Jet wronskian(const Potential& v, Complex omega, WronskianKind kind, const WronskianOptions& opt = {});

/// Repeated evaluation of J for one potential and kind.
class WronskianFn {
 public:
  WronskianFn(const Potential& v, WronskianKind kind, WronskianOptions opt = {});
  [[nodiscard]] Jet operator()(Complex omega) const;
  [[nodiscard]] WronskianKind kind() const noexcept { return kind_; }
  [[nodiscard]] const Potential& potential() const noexcept { return fine_.potential(); }

 private:
  [[nodiscard]] Jet raw(const Propagator& p, Complex omega) const;

  WronskianKind kind_;
  WronskianOptions opt_;
  Propagator fine_;
  std::optional<Propagator> coarse_;
};

/// Any analytic function returned with its first two derivatives.
using AnalyticFn = std::function<Jet(Complex)>;

struct ContourOptions {
  double tol_root = kTolRoot;
  /// Maximal halvings of an initial panel before giving up as too coarse.
  int max_depth = 14;
  /// Initial panels per unit length of edge (at least 4 per edge).
  double panels_per_unit = 1.0;
};

/// Number of power sums Σ (zⱼ - c)^k kept by the contour count.
inline constexpr std::size_t kPowerSums = 8;

struct ContourCount {
  int n = 0;
  double unrounded = 0.0;  // (1/2πi)∮ J'/J dω from the quadrature
  double min_abs = 0.0;    // smallest |J| met on the boundary
  double median_abs = 0.0;
  int evaluations = 0;
  /// (1/2πi)∮ (z - centre)^k J'/J dz for k = 1..kPowerSums: sums of powers of
  /// the enclosed zeros about the rectangle centre, to quadrature accuracy.
  Complex centre;
  std::vector<Complex> power_sums;
};

/// Argument-principle count of zeros minus poles inside the rectangle.
/// Throws ContourError (Degenerate) when |J| on the boundary falls below
/// tol_root times its median there, (TooCoarse) when the quadrature does not
/// settle within 0.05 of an integer.
[[nodiscard]] ContourCount count_zeros_detail(const AnalyticFn& f, const Rect& r, const ContourOptions& opt = {});
[[nodiscard]] int count_zeros(const AnalyticFn& f, const Rect& r, const ContourOptions& opt = {});
[[nodiscard]] int count_zeros(const Potential& v, const Rect& r, WronskianKind kind,
                              const WronskianOptions& wopt = {}, const ContourOptions& opt = {});

struct Root {
  Complex omega;
  int multiplicity = 1;
  ModeClass classification = ModeClass::QNM;
  double residual = 0.0;  // |J| / edge-median |J| at the reported root
  Complex dJ;
};

struct SpectrumReport {
  WronskianKind kind = WronskianKind::Gamma;
  std::vector<Root> roots;
  Rect contour;
  int counting_total = 0;
  bool complete = true;
  std::string note;
};

struct FindOptions {
  ContourOptions contour;
  /// Maximum number of rectangles examined.
  int budget = 4000;
  /// Cells smaller than this (relative to 1 + |centre|) holding several zeros
  /// are treated as one multiple root.
  double multiple_root_size = 1e-4;
};

/// Zeros of f inside the region by recursive quadrisection and Newton polish.
[[nodiscard]] SpectrumReport find_roots(const AnalyticFn& f, const Rect& region, WronskianKind kind,
                                        const FindOptions& opt = {});
[[nodiscard]] SpectrumReport find_roots(const Potential& v, const Rect& region, WronskianKind kind,
                                        const FindOptions& opt = {}, const WronskianOptions& wopt = {});

/// Default search rectangle for examples.
inline constexpr Rect kDefaultRegion{-15.0, 15.0, -8.0, 0.5};

/// Newton on f (simple root) or on f' (double root) from a starting point.
/// Returns nullopt when the iteration leaves `box` or fails to converge.
[[nodiscard]] std::optional<Complex> newton(const AnalyticFn& f, Complex start, const Rect& box, bool on_derivative,
                                            double abs_tol);

struct AxisBracket {
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  double gamma = 0.0;  // refined root of J(-iγ)
};

/// Sign changes of the real function J(-iγ) on [gamma_lo, gamma_hi], refined by
/// bisection. Throws ConsistencyError when Im J exceeds 1e-10 |J|.
[[nodiscard]] std::vector<AxisBracket> imaginary_axis_scan(const AnalyticFn& f, double gamma_lo, double gamma_hi,
                                                           int samples);
[[nodiscard]] std::vector<AxisBracket> imaginary_axis_scan(const Potential& v, WronskianKind kind, double gamma_lo,
                                                           double gamma_hi, int samples,
                                                           const WronskianOptions& wopt = {});

/// NM / QNM / ZeroMode from the position of ω. Throws UnclassifiableError near 0.
[[nodiscard]] ModeClass classify(Complex omega);
/// Same with an explicit absolute tolerance for |Re ω| (and |ω| near 0).
[[nodiscard]] ModeClass classify(Complex omega, double axis_tol);

struct Coalescence {
  double parameter = 0.0;
  Complex omega;
  int multiplicity = 0;  // tight contour count at omega
  double dJ_abs = 0.0;
  double dJ_scale = 0.0;  // |d²J| (1 + |ω|), the natural size of dJ near a double root
};

/// Bisects a one-parameter family on whether the two imaginary-axis zeros
/// bracketed in [gamma_lo, gamma_hi] still exist. At param_lo there must be
/// two simple zeros; throws NotFoundError if they survive to param_hi.
[[nodiscard]] Coalescence find_coalescence(const std::function<Potential(double)>& family, double param_lo,
                                           double param_hi, WronskianKind kind, double gamma_lo, double gamma_hi,
                                           const WronskianOptions& wopt = {});

}  // namespace qnmsusy
