#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace qnmsusy {

/// Constant value on [x_lo, x_hi).
struct Segment {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double value = 0.0;
  bool operator==(const Segment&) const = default;
};

/// Uniformly sampled stretch of a potential; values[k] sits at
/// x_lo + k (x_hi - x_lo) / (values.size() - 1). Adjacent pieces may disagree
/// at their shared endpoint, which is how jump discontinuities are stored.
struct SampledPiece {
  double x_lo = 0.0;
  double x_hi = 0.0;
  std::vector<double> values;

  [[nodiscard]] std::size_t cells() const { return values.size() - 1; }
  [[nodiscard]] double spacing() const { return (x_hi - x_lo) / static_cast<double>(cells()); }
  [[nodiscard]] double node(std::size_t k) const;
  bool operator==(const SampledPiece&) const = default;
};

enum class Side { Left, Right };

/// Real potential supported on [-a, a] and identically zero outside.
///
/// Two representations: piecewise constant (exact transfer matrices apply) and
/// piecewise-linear samples. Segment and piece boundaries follow the half-open
/// convention [x_lo, x_hi) with the last one closed at +a.
class Potential {
 public:
  enum class Form { PiecewiseConstant, Sampled };

  static Potential piecewise_constant(std::vector<Segment> segments);
  static Potential sampled(std::vector<SampledPiece> pieces);
  /// Single uniform piece of values.size() - 1 cells over [-a, a].
  static Potential sampled_uniform(double half_width, std::vector<double> values);
  static Potential zero(double half_width);

  [[nodiscard]] Form form() const noexcept { return form_; }
  [[nodiscard]] bool is_piecewise_constant() const noexcept { return form_ == Form::PiecewiseConstant; }
  [[nodiscard]] double half_width() const noexcept { return half_width_; }
  [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
  [[nodiscard]] const std::vector<SampledPiece>& pieces() const noexcept { return pieces_; }

  [[nodiscard]] double operator()(double x) const;
  /// One-sided limit at x; differs from operator() only at jumps.
  [[nodiscard]] double limit(double x, Side side) const;

  /// Positions inside [-a, a] (ends included) where V may fail to be smooth:
  /// segment boundaries, or every sample node.
  [[nodiscard]] std::vector<double> knots() const;
  /// Boundaries of the structural pieces (segments, or sampled pieces).
  [[nodiscard]] std::vector<double> breakpoints() const;

  /// True for sampled potentials whose pieces all have an even cell count, so
  /// that every second sample forms a valid coarser potential.
  [[nodiscard]] bool coarsenable() const;
  /// The same potential keeping every second sample of each piece.
  [[nodiscard]] Potential coarsened() const;

  [[nodiscard]] double max_abs() const;

  bool operator==(const Potential&) const = default;

 private:
  Potential() = default;

  Form form_ = Form::PiecewiseConstant;
  double half_width_ = 0.0;
  std::vector<Segment> segments_;
  std::vector<SampledPiece> pieces_;
};

[[nodiscard]] inline double evaluate(const Potential& v, double x) { return v(x); }

/// V(x) -> V(-x).
[[nodiscard]] Potential reflect(const Potential& v);

/// Pointwise sum V + dV. The half-widths must agree.
[[nodiscard]] Potential perturb(const Potential& v, const Potential& dv);

/// Square barrier of the given height on [-a, a].
[[nodiscard]] Potential square_barrier(double height, double half_width = 1.0);

/// -10 for |x| < 0.1, 1 for 0.1 < |x| < 1.
[[nodiscard]] Potential multi_step_barrier();

/// Two-column text file (x, V) with increasing x. A repeated abscissa marks a
/// jump: the first value closes the piece on the left, the second opens the
/// next piece. Each piece must be uniformly spaced; the ends must be -a and +a.
[[nodiscard]] Potential load_samples(const std::filesystem::path& path);
void save_samples(const std::filesystem::path& path, const Potential& v);
[[nodiscard]] std::string format_samples(const Potential& v);

}  // namespace qnmsusy
