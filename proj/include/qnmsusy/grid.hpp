#pragma once

#include <cstddef>
#include <vector>

namespace qnmsusy {

class Potential;

inline constexpr std::size_t kDefaultGridPoints = 4097;

/// Increasing abscissae over [-a, a], uniform within each piece.
///
/// Pieces meet at the structural breakpoints of the potential they were built
/// for, so no cell straddles a jump. Quadrature and finite differences work
/// piece by piece.
class Grid {
 public:
  Grid() = default;

  static Grid uniform(double lo, double hi, std::size_t cells);
  static Grid piecewise(const std::vector<double>& breaks, const std::vector<std::size_t>& cells);
  /// Pieces at the breakpoints of v. Piecewise-constant potentials get about
  /// `points` nodes in total (even cell count per piece, at least 6); sampled
  /// potentials get their own sample layout and `points` is ignored.
  static Grid for_potential(const Potential& v, std::size_t points = kDefaultGridPoints);

  [[nodiscard]] std::size_t size() const noexcept { return x_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return x_[i]; }
  [[nodiscard]] const std::vector<double>& x() const noexcept { return x_; }
  [[nodiscard]] double lo() const { return x_.front(); }
  [[nodiscard]] double hi() const { return x_.back(); }

  [[nodiscard]] std::size_t piece_count() const noexcept { return breaks_.size() - 1; }
  /// First and last node index of piece p (inclusive).
  [[nodiscard]] std::size_t piece_begin(std::size_t p) const { return breaks_[p]; }
  [[nodiscard]] std::size_t piece_end(std::size_t p) const { return breaks_[p + 1]; }
  [[nodiscard]] double piece_spacing(std::size_t p) const;
  [[nodiscard]] const std::vector<std::size_t>& break_indices() const noexcept { return breaks_; }

  /// Every cell halved.
  [[nodiscard]] Grid refined() const;
  [[nodiscard]] std::size_t nearest(double x) const;

  bool operator==(const Grid&) const = default;

 private:
  std::vector<double> x_;
  std::vector<std::size_t> breaks_;
};

}  // namespace qnmsusy
