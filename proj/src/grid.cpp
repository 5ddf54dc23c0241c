#include "qnmsusy/grid.hpp"

#include <algorithm>
#include <cmath>

#include "qnmsusy/errors.hpp"
#include "qnmsusy/potential.hpp"

namespace qnmsusy {

Grid Grid::uniform(double lo, double hi, std::size_t cells) { return piecewise({lo, hi}, {cells}); }

Grid Grid::piecewise(const std::vector<double>& breaks, const std::vector<std::size_t>& cells) {
  if (breaks.size() < 2 || cells.size() + 1 != breaks.size()) {
    throw InvalidInput("grid needs one cell count per piece");
  }
  Grid g;
  g.breaks_.push_back(0);
  g.x_.push_back(breaks.front());
  for (std::size_t p = 0; p < cells.size(); ++p) {
    const double lo = breaks[p];
    const double hi = breaks[p + 1];
    if (!(hi > lo) || cells[p] == 0) throw InvalidInput("grid pieces must have positive length and cells");
    const auto n = static_cast<double>(cells[p]);
    for (std::size_t k = 1; k < cells[p]; ++k) g.x_.push_back(lo + (hi - lo) * static_cast<double>(k) / n);
    g.x_.push_back(hi);
    g.breaks_.push_back(g.x_.size() - 1);
  }
  return g;
}

Grid Grid::for_potential(const Potential& v, std::size_t points) {
  if (!v.is_piecewise_constant()) {
    std::vector<double> breaks;
    std::vector<std::size_t> cells;
    for (const auto& p : v.pieces()) {
      breaks.push_back(p.x_lo);
      cells.push_back(p.cells());
    }
    breaks.push_back(v.pieces().back().x_hi);
    return piecewise(breaks, cells);
  }
  if (points < 3) throw InvalidInput("grid needs at least three points");
  const auto breaks = v.breakpoints();
  const double h = 2.0 * v.half_width() / static_cast<double>(points - 1);
  std::vector<std::size_t> cells;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double len = breaks[p + 1] - breaks[p];
    const auto half = static_cast<std::size_t>(std::llround(len / (2.0 * h)));
    cells.push_back(std::max<std::size_t>(6, 2 * half));
  }
  return piecewise(breaks, cells);
}

double Grid::piece_spacing(std::size_t p) const {
  const auto b = breaks_[p];
  const auto e = breaks_[p + 1];
  return (x_[e] - x_[b]) / static_cast<double>(e - b);
}

Grid Grid::refined() const {
  std::vector<double> breaks;
  std::vector<std::size_t> cells;
  for (std::size_t p = 0; p < piece_count(); ++p) {
    breaks.push_back(x_[breaks_[p]]);
    cells.push_back(2 * (breaks_[p + 1] - breaks_[p]));
  }
  breaks.push_back(x_.back());
  return piecewise(breaks, cells);
}

std::size_t Grid::nearest(double x) const {
  auto it = std::lower_bound(x_.begin(), x_.end(), x);
  if (it == x_.end()) return x_.size() - 1;
  auto i = static_cast<std::size_t>(std::distance(x_.begin(), it));
  if (i > 0 && std::abs(x_[i - 1] - x) <= std::abs(x_[i] - x)) --i;
  return i;
}

}  // namespace qnmsusy
