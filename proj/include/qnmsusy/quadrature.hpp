#pragma once

#include <span>
#include <vector>

#include "qnmsusy/grid.hpp"
#include "qnmsusy/types.hpp"

namespace qnmsusy {

/// ∫ f dx over the grid: composite Simpson per piece, with a closing 3/8 rule
/// on pieces with an odd cell count.
[[nodiscard]] Complex integrate(const Grid& g, std::span<const Complex> f);
[[nodiscard]] double integrate(const Grid& g, std::span<const double> f);
/// The same with an override for the left-hand piece at shared nodes:
/// left_limits[k] replaces f at break node k + 1 when integrating piece k.
[[nodiscard]] Complex integrate(const Grid& g, std::span<const Complex> f, std::span<const Complex> left_limits);

/// Fourth-order finite differences inside each piece, one-sided at piece
/// ends. A node shared by two pieces takes its value from the right-hand
/// piece, matching the half-open convention of Potential; the left-hand
/// values at shared nodes go to *left_limits when given.
[[nodiscard]] std::vector<Complex> differentiate(const Grid& g, std::span<const Complex> f,
                                                 std::vector<Complex>* left_limits = nullptr);
[[nodiscard]] std::vector<Complex> differentiate2(const Grid& g, std::span<const Complex> f,
                                                  std::vector<Complex>* left_limits = nullptr);

}  // namespace qnmsusy
