#include "qnmsusy/quadrature.hpp"

#include "qnmsusy/errors.hpp"

namespace qnmsusy {

namespace {

template <typename T>
T integrate_piece(std::span<const T> f, std::size_t b, std::size_t e, double h) {
  const std::size_t cells = e - b;
  if (cells == 1) return 0.5 * h * (f[b] + f[e]);
  T sum{};
  std::size_t simpson_end = e;
  if (cells % 2 == 1) {
    // 3/8 rule on the last three cells
    simpson_end = e - 3;
    sum += 3.0 * h / 8.0 * (f[e - 3] + 3.0 * f[e - 2] + 3.0 * f[e - 1] + f[e]);
  }
  if (simpson_end > b) {
    T inner{};
    for (std::size_t i = b + 1; i < simpson_end; i += 2) inner += 4.0 * f[i] + 2.0 * f[i + 1];
    inner += f[b] - f[simpson_end];
    sum += h / 3.0 * inner;
  }
  return sum;
}

template <typename T>
T integrate_all(const Grid& g, std::span<const T> f) {
  if (f.size() != g.size()) throw InvalidInput("integrand does not match the grid");
  T sum{};
  for (std::size_t p = 0; p < g.piece_count(); ++p) {
    sum += integrate_piece(f, g.piece_begin(p), g.piece_end(p), g.piece_spacing(p));
  }
  return sum;
}

// Derivative of order 1 or 2 on nodes b..e of one uniform piece.
void fd_piece(std::span<const Complex> f, std::size_t b, std::size_t e, double h, int order,
              std::vector<Complex>& out) {
  const std::size_t n = e - b + 1;
  auto F = [&](std::size_t k) { return f[b + k]; };
  auto put = [&](std::size_t k, Complex v) { out[b + k] = v; };
  if (order == 1) {
    if (n < 5) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == 0) put(k, (F(1) - F(0)) / h);
        else if (k == n - 1) put(k, (F(k) - F(k - 1)) / h);
        else put(k, (F(k + 1) - F(k - 1)) / (2.0 * h));
      }
      return;
    }
    const double c = 1.0 / (12.0 * h);
    put(0, c * (-25.0 * F(0) + 48.0 * F(1) - 36.0 * F(2) + 16.0 * F(3) - 3.0 * F(4)));
    put(1, c * (-3.0 * F(0) - 10.0 * F(1) + 18.0 * F(2) - 6.0 * F(3) + F(4)));
    for (std::size_t k = 2; k + 2 < n; ++k) put(k, c * (F(k - 2) - 8.0 * F(k - 1) + 8.0 * F(k + 1) - F(k + 2)));
    const std::size_t l = n - 1;
    put(l, -c * (-25.0 * F(l) + 48.0 * F(l - 1) - 36.0 * F(l - 2) + 16.0 * F(l - 3) - 3.0 * F(l - 4)));
    put(l - 1, -c * (-3.0 * F(l) - 10.0 * F(l - 1) + 18.0 * F(l - 2) - 6.0 * F(l - 3) + F(l - 4)));
    return;
  }
  if (n < 6) {
    if (n < 3) throw InvalidInput("second derivative needs at least three nodes per piece");
    const double c = 1.0 / (h * h);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t m = std::min(std::max<std::size_t>(k, 1), n - 2);
      put(k, c * (F(m - 1) - 2.0 * F(m) + F(m + 1)));
    }
    return;
  }
  const double c = 1.0 / (12.0 * h * h);
  put(0, c * (45.0 * F(0) - 154.0 * F(1) + 214.0 * F(2) - 156.0 * F(3) + 61.0 * F(4) - 10.0 * F(5)));
  put(1, c * (10.0 * F(0) - 15.0 * F(1) - 4.0 * F(2) + 14.0 * F(3) - 6.0 * F(4) + F(5)));
  for (std::size_t k = 2; k + 2 < n; ++k) {
    put(k, c * (-F(k - 2) + 16.0 * F(k - 1) - 30.0 * F(k) + 16.0 * F(k + 1) - F(k + 2)));
  }
  const std::size_t l = n - 1;
  put(l, c * (45.0 * F(l) - 154.0 * F(l - 1) + 214.0 * F(l - 2) - 156.0 * F(l - 3) + 61.0 * F(l - 4) -
              10.0 * F(l - 5)));
  put(l - 1, c * (10.0 * F(l) - 15.0 * F(l - 1) - 4.0 * F(l - 2) + 14.0 * F(l - 3) - 6.0 * F(l - 4) + F(l - 5)));
}

std::vector<Complex> fd(const Grid& g, std::span<const Complex> f, int order, std::vector<Complex>* left_limits) {
  if (f.size() != g.size()) throw InvalidInput("values do not match the grid");
  std::vector<Complex> out(f.size());
  if (left_limits) left_limits->assign(g.piece_count() - 1, Complex{});
  // Left to right, so a shared node ends up with the right-hand piece's value.
  for (std::size_t p = 0; p < g.piece_count(); ++p) {
    fd_piece(f, g.piece_begin(p), g.piece_end(p), g.piece_spacing(p), order, out);
    if (left_limits && p + 1 < g.piece_count()) (*left_limits)[p] = out[g.piece_end(p)];
  }
  return out;
}

}  // namespace

Complex integrate(const Grid& g, std::span<const Complex> f) { return integrate_all(g, f); }

Complex integrate(const Grid& g, std::span<const Complex> f, std::span<const Complex> left_limits) {
  if (left_limits.empty()) return integrate_all(g, f);
  if (f.size() != g.size() || left_limits.size() + 1 != g.piece_count()) {
    throw InvalidInput("integrand does not match the grid");
  }
  Complex sum{};
  std::vector<Complex> piece;
  for (std::size_t p = 0; p < g.piece_count(); ++p) {
    const std::size_t b = g.piece_begin(p);
    const std::size_t e = g.piece_end(p);
    piece.assign(f.begin() + static_cast<std::ptrdiff_t>(b), f.begin() + static_cast<std::ptrdiff_t>(e) + 1);
    if (p + 1 < g.piece_count()) piece.back() = left_limits[p];
    sum += integrate_piece(std::span<const Complex>(piece), 0, e - b, g.piece_spacing(p));
  }
  return sum;
}
double integrate(const Grid& g, std::span<const double> f) { return integrate_all(g, f); }

std::vector<Complex> differentiate(const Grid& g, std::span<const Complex> f, std::vector<Complex>* left_limits) {
  return fd(g, f, 1, left_limits);
}
std::vector<Complex> differentiate2(const Grid& g, std::span<const Complex> f, std::vector<Complex>* left_limits) {
  return fd(g, f, 2, left_limits);
}

}  // namespace qnmsusy
