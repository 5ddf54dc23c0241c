#pragma once

#include <array>
#include <complex>
#include <numbers>

namespace qnmsusy {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

/// Second-order Taylor jet in the frequency: value, d/dω and d²/dω².
///
/// Arithmetic on jets is the chain/product rule truncated at second order, so
/// propagating a jet through the transfer matrices yields the solutions of the
/// first and second variational equations alongside the solution itself.
struct Jet {
  Complex v{};
  Complex d1{};
  Complex d2{};

  constexpr Jet() = default;
  constexpr Jet(Complex value) : v(value) {}  // NOLINT: implicit constant jet
  constexpr Jet(Complex value, Complex first, Complex second)
      : v(value), d1(first), d2(second) {}

  /// The independent variable ω itself.
  static constexpr Jet variable(Complex omega) { return {omega, 1.0, 0.0}; }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    d1 += o.d1;
    d2 += o.d2;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    d1 -= o.d1;
    d2 -= o.d2;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = Jet{v * o.v, d1 * o.v + v * o.d1, d2 * o.v + 2.0 * d1 * o.d1 + v * o.d2};
    return *this;
  }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator-(const Jet& a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator*(Complex s, const Jet& a) { return {s * a.v, s * a.d1, s * a.d2}; }
inline Jet operator*(const Jet& a, Complex s) { return s * a; }
inline Jet operator*(double s, const Jet& a) { return {s * a.v, s * a.d1, s * a.d2}; }

inline Jet reciprocal(const Jet& a) {
  const Complex r = 1.0 / a.v;
  const Complex r2 = r * r;
  return {r, -a.d1 * r2, 2.0 * a.d1 * a.d1 * r2 * r - a.d2 * r2};
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

/// Compose a scalar function with a jet given f(v), f'(v), f''(v).
inline Jet compose(const Jet& a, Complex f, Complex df, Complex d2f) {
  return {f, df * a.d1, d2f * a.d1 * a.d1 + df * a.d2};
}

template <typename T>
struct Mat2 {
  std::array<T, 4> m{};  // row-major: [0]=m00 [1]=m01 [2]=m10 [3]=m11

  T& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }
  const T& operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }

  static Mat2 identity() {
    Mat2 out;
    out.m = {T{1.0}, T{0.0}, T{0.0}, T{1.0}};
    return out;
  }
};

template <typename T>
Mat2<T> operator*(const Mat2<T>& a, const Mat2<T>& b) {
  Mat2<T> out;
  out.m[0] = a.m[0] * b.m[0] + a.m[1] * b.m[2];
  out.m[1] = a.m[0] * b.m[1] + a.m[1] * b.m[3];
  out.m[2] = a.m[2] * b.m[0] + a.m[3] * b.m[2];
  out.m[3] = a.m[2] * b.m[1] + a.m[3] * b.m[3];
  return out;
}

template <typename T>
std::array<T, 2> operator*(const Mat2<T>& a, const std::array<T, 2>& y) {
  return {a.m[0] * y[0] + a.m[1] * y[1], a.m[2] * y[0] + a.m[3] * y[1]};
}

using CMat2 = Mat2<Complex>;
using JetMat2 = Mat2<Jet>;

/// Rectangle in the complex frequency plane.
struct Rect {
  double re_lo = 0.0;
  double re_hi = 0.0;
  double im_lo = 0.0;
  double im_hi = 0.0;

  [[nodiscard]] bool well_formed() const { return re_lo < re_hi && im_lo < im_hi; }
  [[nodiscard]] Complex center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
  [[nodiscard]] double width() const { return re_hi - re_lo; }
  [[nodiscard]] double height() const { return im_hi - im_lo; }
  [[nodiscard]] bool contains(Complex z, double pad = 0.0) const {
    return z.real() >= re_lo - pad && z.real() <= re_hi + pad && z.imag() >= im_lo - pad &&
           z.imag() <= im_hi + pad;
  }
  static Rect around(Complex z, double half) {
    return {z.real() - half, z.real() + half, z.imag() - half, z.imag() + half};
  }
};

}  // namespace qnmsusy
