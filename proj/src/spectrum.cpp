#include "qnmsusy/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "qnmsusy/errors.hpp"
#include "qnmsusy/parallel.hpp"

namespace qnmsusy {

const char* to_string(WronskianKind k) {
  switch (k) {
    case WronskianKind::Gamma: return "Gamma";
    case WronskianKind::TTM_L: return "TTM_L";
    case WronskianKind::TTM_R: return "TTM_R";
  }
  return "?";
}

WronskianKind wronskian_kind_from_string(const std::string& s) {
  if (s == "Gamma" || s == "gamma") return WronskianKind::Gamma;
  if (s == "TTM_L" || s == "ttm_l") return WronskianKind::TTM_L;
  if (s == "TTM_R" || s == "ttm_r") return WronskianKind::TTM_R;
  throw InvalidInput("unknown Wronskian kind '" + s + "' (expected Gamma, TTM_L or TTM_R)");
}

BoundaryKind left_kind(WronskianKind k) {
  return k == WronskianKind::TTM_L ? BoundaryKind::IncomingLeft : BoundaryKind::OutgoingLeft;
}

BoundaryKind right_kind(WronskianKind k) {
  return k == WronskianKind::TTM_R ? BoundaryKind::IncomingRight : BoundaryKind::OutgoingRight;
}

const char* to_string(ModeClass c) {
  switch (c) {
    case ModeClass::NM: return "NM";
    case ModeClass::QNM: return "QNM";
    case ModeClass::ZeroMode: return "ZeroMode";
    case ModeClass::TTM: return "TTM";
  }
  return "?";
}

Jet wronskian_of(const JetState& f, const JetState& g) { return f.dphi * g.phi - f.phi * g.dphi; }

WronskianFn::WronskianFn(const Potential& v, WronskianKind kind, WronskianOptions opt)
    : kind_(kind), opt_(opt), fine_(v) {
  if (!(std::abs(opt_.x_match) <= v.half_width())) throw InvalidInput("matching abscissa outside [-a, a]");
  if (opt_.richardson && v.coarsenable()) coarse_.emplace(v.coarsened());
}

Jet WronskianFn::raw(const Propagator& p, Complex omega) const {
  const JetState f = p.to(omega, left_kind(kind_), opt_.x_match);
  const JetState g = p.to(omega, right_kind(kind_), opt_.x_match);
  return wronskian_of(f, g);
}

Jet WronskianFn::operator()(Complex omega) const {
  const Jet fine = raw(fine_, omega);
  if (!coarse_) return fine;
  const Jet coarse = raw(*coarse_, omega);
  return (1.0 / 3.0) * (4.0 * fine - coarse);
}

Jet wronskian(const Potential& v, Complex omega, WronskianKind kind, const WronskianOptions& opt) {
  return WronskianFn(v, kind, opt)(omega);
}

// ---------------------------------------------------------------------------
// Argument principle

namespace {

constexpr std::array<double, 4> kGlX{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                     0.9602898564975363};
constexpr std::array<double, 4> kGlW{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                     0.1012285362903763};

bool lex_less(Complex a, Complex b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); }

struct EdgeResult {
  double winding = 0.0;  // sum of principal arguments
  double gl = 0.0;       // Im of the Gauss-Legendre integral of f'/f
  std::array<Complex, kPowerSums> moments{};  // ∫ (z - c)^k f'/f dz, k = 1..
};

EdgeResult negated(EdgeResult r) {
  r.winding = -r.winding;
  r.gl = -r.gl;
  for (auto& m : r.moments) m = -m;
  return r;
}

class Counter {
 public:
  Counter(const AnalyticFn& f, const ContourOptions& opt) : f_(f), opt_(opt) {}

  ContourCount run(const Rect& r) {
    if (!r.well_formed()) throw InvalidInput("contour rectangle is degenerate");
    centre_ = r.center();
    const Complex c00{r.re_lo, r.im_lo};
    const Complex c10{r.re_hi, r.im_lo};
    const Complex c11{r.re_hi, r.im_hi};
    const Complex c01{r.re_lo, r.im_hi};
    double winding = 0.0;
    double gl = 0.0;
    std::array<Complex, kPowerSums> moments{};
    bool coarse = false;
    for (const auto& [a, b] : {std::pair{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}}) {
      try {
        const EdgeResult e = edge(a, b);
        winding += e.winding;
        gl += e.gl;
        for (std::size_t k = 0; k < kPowerSums; ++k) moments[k] += e.moments[k];
      } catch (const ContourError&) {
        coarse = true;
      }
    }
    ContourCount out;
    out.evaluations = evaluations_;
    std::vector<double> mags = abs_values_;
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2), mags.end());
    out.median_abs = mags[mags.size() / 2];
    out.min_abs = *std::min_element(abs_values_.begin(), abs_values_.end());
    if (hit_zero_ || out.min_abs < opt_.tol_root * out.median_abs) {
      throw ContourError("zero of the Wronskian on or next to the contour", ContourError::Reason::Degenerate);
    }
    if (coarse) {
      throw ContourError("phase of the Wronskian not resolved on the contour", ContourError::Reason::TooCoarse);
    }
    out.unrounded = gl / (2.0 * kPi);
    out.n = static_cast<int>(std::lround(winding / (2.0 * kPi)));
    if (std::abs(out.unrounded - out.n) > 0.05) {
      throw ContourError("argument-principle integral not near an integer", ContourError::Reason::TooCoarse);
    }
    out.centre = centre_;
    for (const auto& m : moments) out.power_sums.push_back(m / (2.0 * kPi * kI));
    return out;
  }

 private:
  Jet eval(Complex z) {
    const Jet j = f_(z);
    ++evaluations_;
    const double m = std::abs(j.v);
    if (!std::isfinite(m) || !std::isfinite(std::abs(j.d1))) {
      throw PropagationError("non-finite Wronskian on the contour", 0.0);
    }
    if (m == 0.0) hit_zero_ = true;
    abs_values_.push_back(m);
    return j;
  }

  // Canonical orientation so shared edges hit the same sample points.
  EdgeResult edge(Complex a, Complex b) {
    if (lex_less(b, a)) return negated(edge(b, a));
    const double len = std::abs(b - a);
    int panels = 4;
    while (panels < len * opt_.panels_per_unit) panels *= 2;
    EdgeResult out;
    Jet ja = eval(a);
    for (int p = 0; p < panels; ++p) {
      const Complex za = a + (b - a) * (static_cast<double>(p) / panels);
      const Complex zb = (p + 1 == panels) ? b : a + (b - a) * (static_cast<double>(p + 1) / panels);
      const Jet jb = eval(zb);
      panel(za, zb, ja, jb, 0, out);
      ja = jb;
    }
    return out;
  }

  void panel(Complex za, Complex zb, const Jet& ja, const Jet& jb, int depth, EdgeResult& out) {
    if (hit_zero_) throw ContourError("zero on contour", ContourError::Reason::Degenerate);
    const Complex principal = std::log(jb.v / ja.v);
    const Complex half = 0.5 * (zb - za);
    const Complex mid = za + half;
    Complex integral{};
    std::array<Complex, kPowerSums> moments{};
    for (std::size_t k = 0; k < kGlX.size(); ++k) {
      for (double s : {-1.0, 1.0}) {
        const Complex z = mid + s * kGlX[k] * half;
        const Jet j = eval(z);
        const Complex w = kGlW[k] * j.d1 / j.v;
        integral += w;
        Complex p = w;
        for (auto& m : moments) {
          p *= z - centre_;
          m += p;
        }
      }
    }
    integral *= half;
    const bool ok = std::abs(principal.imag()) < 0.5 * kPi && std::abs(integral.imag() - principal.imag()) < 1e-3 &&
                    std::abs(integral.real() - principal.real()) < 1e-3 * (1.0 + std::abs(principal.real()));
    if (ok) {
      out.winding += principal.imag();
      out.gl += integral.imag();
      for (std::size_t k = 0; k < kPowerSums; ++k) out.moments[k] += half * moments[k];
      return;
    }
    if (depth >= opt_.max_depth) throw ContourError("panel refinement limit", ContourError::Reason::TooCoarse);
    const Jet jm = eval(mid);
    panel(za, mid, ja, jm, depth + 1, out);
    panel(mid, zb, jm, jb, depth + 1, out);
  }

  const AnalyticFn& f_;
  ContourOptions opt_;
  std::vector<double> abs_values_;
  int evaluations_ = 0;
  bool hit_zero_ = false;
  Complex centre_;
};

// Memoizes an analytic function on exact sample points; shared by all cells of
// one root search.
AnalyticFn memoize(AnalyticFn f) {
  struct State {
    AnalyticFn f;
    std::map<std::pair<double, double>, Jet> cache;
    std::mutex m;
  };
  auto st = std::make_shared<State>();
  st->f = std::move(f);
  return [st](Complex z) {
    const std::pair key{z.real(), z.imag()};
    {
      std::lock_guard lock(st->m);
      if (auto it = st->cache.find(key); it != st->cache.end()) return it->second;
    }
    const Jet j = st->f(z);
    std::lock_guard lock(st->m);
    st->cache.emplace(key, j);
    return j;
  };
}

}  // namespace

ContourCount count_zeros_detail(const AnalyticFn& f, const Rect& r, const ContourOptions& opt) {
  return Counter(f, opt).run(r);
}

int count_zeros(const AnalyticFn& f, const Rect& r, const ContourOptions& opt) {
  return count_zeros_detail(f, r, opt).n;
}

int count_zeros(const Potential& v, const Rect& r, WronskianKind kind, const WronskianOptions& wopt,
                const ContourOptions& opt) {
  const WronskianFn j(v, kind, wopt);
  return count_zeros([&j](Complex z) { return j(z); }, r, opt);
}

// ---------------------------------------------------------------------------
// Root search

ModeClass classify(Complex omega) { return classify(omega, tol_axis(omega)); }

ModeClass classify(Complex omega, double tol) {
  if (std::abs(omega.real()) <= tol && std::abs(omega.imag()) <= tol) {
    throw UnclassifiableError("ω = 0 is neither a normal nor a quasinormal mode");
  }
  if (omega.imag() > 0.0) return ModeClass::NM;
  if (std::abs(omega.real()) <= tol) return ModeClass::ZeroMode;
  return ModeClass::QNM;
}

std::optional<Complex> newton(const AnalyticFn& f, Complex start, const Rect& box, bool on_derivative,
                              double abs_tol) {
  Complex z = start;
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 80; ++it) {
    const Jet j = f(z);
    const Complex num = on_derivative ? j.d1 : j.v;
    const Complex den = on_derivative ? j.d2 : j.d1;
    if (std::abs(num) <= abs_tol) return z;
    if (den == 0.0 || !std::isfinite(std::abs(den))) return std::nullopt;
    const Complex step = num / den;
    z -= step;
    if (!box.contains(z, 1e-12 * (1.0 + std::abs(z)))) return std::nullopt;
    const double s = std::abs(step) / (1.0 + std::abs(z));
    if (s <= 4e-16) return z;
    // Stalled at the noise floor of f: the steps stop shrinking.
    if (s <= 1e-11 && s >= 0.5 * last) return z;
    last = s;
  }
  if (last <= 1e-11) return z;
  return std::nullopt;
}

namespace {

struct Cell {
  Rect r;
  int n = 0;
  double median = 0.0;
  Complex centre;
  std::vector<Complex> sums;
};

Cell make_cell(const Rect& r, const ContourCount& c) { return {r, c.n, c.median_abs, c.centre, c.power_sums}; }

// Cells holding up to this many zeros are first tried with moment estimates.
constexpr int kMaxMomentRoots = 6;

// Zeros of the monic polynomial whose roots have the given power sums
// (Newton's identities, then Durand-Kerner).
std::vector<Complex> roots_from_power_sums(const std::vector<Complex>& p, int n) {
  std::vector<Complex> e(static_cast<std::size_t>(n) + 1);
  e[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    Complex acc{};
    for (int i = 1; i <= k; ++i) {
      const double sgn = (i % 2 == 1) ? 1.0 : -1.0;
      acc += sgn * e[static_cast<std::size_t>(k - i)] * p[static_cast<std::size_t>(i - 1)];
    }
    e[static_cast<std::size_t>(k)] = acc / static_cast<double>(k);
  }
  auto poly = [&](Complex z) {
    Complex v = 1.0;
    for (int k = 1; k <= n; ++k) v = v * z + ((k % 2 == 1) ? -1.0 : 1.0) * e[static_cast<std::size_t>(k)];
    return v;
  };
  const double r = std::sqrt(std::abs(p.size() > 1 ? p[1] : p[0]) / n) + 1e-3;
  std::vector<Complex> z(static_cast<std::size_t>(n));
  Complex seed{0.4, 0.9};
  for (auto& zi : z) {
    zi = r * seed;
    seed *= Complex{0.4, 0.9};
  }
  for (int it = 0; it < 500; ++it) {
    double move = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      Complex den = 1.0;
      for (std::size_t j = 0; j < z.size(); ++j) {
        if (j != i) den *= z[i] - z[j];
      }
      if (den == 0.0) den = 1e-12;
      const Complex step = poly(z[i]) / den;
      z[i] -= step;
      move = std::max(move, std::abs(step));
    }
    if (move <= 1e-14 * (1.0 + r)) break;
  }
  return z;
}

// All n zeros of a cell from its power sums plus Newton polish, or nothing if
// they do not come out as n distinct zeros inside the cell.
std::optional<std::vector<Complex>> resolve_by_moments(const AnalyticFn& f, const Cell& c, double abs_tol) {
  if (c.n < 1 || c.n > kMaxMomentRoots || static_cast<int>(c.sums.size()) < c.n) return std::nullopt;
  const auto guesses = roots_from_power_sums(c.sums, c.n);
  std::vector<Complex> out;
  for (const Complex g : guesses) {
    std::optional<Complex> z = newton(f, c.centre + g, c.r, false, abs_tol);
    if (!z && c.n == 1) z = newton(f, c.r.center(), c.r, false, abs_tol);
    if (!z || !c.r.contains(*z)) return std::nullopt;
    for (const Complex o : out) {
      if (std::abs(o - *z) <= 1e-6 * (1.0 + std::abs(*z))) return std::nullopt;
    }
    out.push_back(*z);
  }
  return out;
}

// Halves a cell across its longer side, or quarters it when roughly square.
std::optional<std::vector<Cell>> split(const AnalyticFn& f, const Cell& c, const ContourOptions& opt) {
  static constexpr std::array<std::array<double, 2>, 6> kFractions{
      {{0.5371, 0.4729}, {0.4413, 0.5587}, {0.6131, 0.3869}, {0.3719, 0.6317}, {0.5, 0.5}, {0.2963, 0.7071}}};
  const double w = c.r.width();
  const double h = c.r.height();
  for (const auto& [fx, fy] : kFractions) {
    const double xs = c.r.re_lo + fx * w;
    const double ys = c.r.im_lo + fy * h;
    std::vector<Rect> kids;
    if (w > 2.0 * h) {
      kids = {{c.r.re_lo, xs, c.r.im_lo, c.r.im_hi}, {xs, c.r.re_hi, c.r.im_lo, c.r.im_hi}};
    } else if (h > 2.0 * w) {
      kids = {{c.r.re_lo, c.r.re_hi, c.r.im_lo, ys}, {c.r.re_lo, c.r.re_hi, ys, c.r.im_hi}};
    } else {
      kids = {{c.r.re_lo, xs, c.r.im_lo, ys},
              {xs, c.r.re_hi, c.r.im_lo, ys},
              {c.r.re_lo, xs, ys, c.r.im_hi},
              {xs, c.r.re_hi, ys, c.r.im_hi}};
    }
    try {
      const auto counts = parallel_map(kids, [&](const Rect& r) { return count_zeros_detail(f, r, opt); });
      int sum = 0;
      for (const auto& k : counts) sum += k.n;
      if (sum != c.n) continue;
      std::vector<Cell> out;
      for (std::size_t i = 0; i < kids.size(); ++i) out.push_back(make_cell(kids[i], counts[i]));
      return out;
    } catch (const ContourError&) {
    }
  }
  return std::nullopt;
}

// Tight contour around a found root for verification; shrinks if the first
// choice meets a neighbouring zero on its boundary.
std::optional<ContourCount> tight_count(const AnalyticFn& f, Complex z, double half, const ContourOptions& opt) {
  for (int attempt = 0; attempt < 4; ++attempt) {
    try {
      return count_zeros_detail(f, Rect::around(z, half), opt);
    } catch (const ContourError&) {
      half *= 0.37;
    }
  }
  return std::nullopt;
}

}  // namespace

SpectrumReport find_roots(const AnalyticFn& f_in, const Rect& region, WronskianKind kind, const FindOptions& opt) {
  const AnalyticFn f = memoize(f_in);
  SpectrumReport rep;
  rep.kind = kind;
  rep.contour = region;
  const ContourCount total = count_zeros_detail(f, region, opt.contour);
  rep.counting_total = total.n;

  std::vector<Cell> stack{make_cell(region, total)};
  auto report = [&](Complex z, int mult, const Cell& c) {
    const double half = 0.5 * std::max(c.r.width(), c.r.height());
    const double tight = std::max(std::min(half, 1e-3 * (1.0 + std::abs(z))), 1e-9 * (1.0 + std::abs(z)));
    const auto check = tight_count(f, z, tight, opt.contour);
    Root root;
    root.omega = z;
    root.multiplicity = mult;
    const Jet j = f(z);
    root.dJ = j.d1;
    root.residual = check ? std::abs(j.v) / check->median_abs : std::abs(j.v) / c.median;
    if (!check || check->n != mult) {
      rep.complete = false;
      rep.note = "a root failed its tight-contour verification";
    }
    root.classification = (kind == WronskianKind::Gamma) ? classify(z) : ModeClass::TTM;
    rep.roots.push_back(root);
  };
  int examined = 0;
  while (!stack.empty()) {
    if (++examined > opt.budget) {
      rep.complete = false;
      rep.note = "search budget exhausted";
      break;
    }
    const Cell c = stack.back();
    stack.pop_back();
    if (c.n <= 0) continue;
    const Complex centre = c.r.center();
    const double half = 0.5 * std::max(c.r.width(), c.r.height());
    const bool tiny = half < opt.multiple_root_size * (1.0 + std::abs(centre));

    if (!tiny) {
      if (const auto zs = resolve_by_moments(f, c, opt.contour.tol_root * c.median)) {
        for (const Complex z : *zs) report(z, 1, c);
        continue;
      }
    }
    std::optional<Complex> z;
    const int mult = c.n;
    if (c.n == 1) {
      z = newton(f, centre, c.r, false, opt.contour.tol_root * c.median);
      if (z && !c.r.contains(*z)) z.reset();
    } else if (tiny) {
      z = newton(f, centre, Rect::around(centre, 4.0 * half), true, 0.0);
      if (!z) z = centre;
    }
    if (!z && tiny) z = centre;
    if (z) {
      report(*z, mult, c);
      continue;
    }
    const auto kids = split(f, c, opt.contour);
    if (!kids) {
      rep.complete = false;
      rep.note = "could not subdivide a cell without meeting a zero on its edges";
      continue;
    }
    for (const auto& k : *kids) {
      if (k.n > 0) stack.push_back(k);
    }
  }
  std::sort(rep.roots.begin(), rep.roots.end(), [](const Root& a, const Root& b) {
    if (a.omega.imag() != b.omega.imag()) return a.omega.imag() < b.omega.imag();
    return a.omega.real() < b.omega.real();
  });
  int found = 0;
  for (const auto& r : rep.roots) found += r.multiplicity;
  if (found != rep.counting_total) rep.complete = false;
  return rep;
}

SpectrumReport find_roots(const Potential& v, const Rect& region, WronskianKind kind, const FindOptions& opt,
                          const WronskianOptions& wopt) {
  const WronskianFn j(v, kind, wopt);
  return find_roots([&j](Complex z) { return j(z); }, region, kind, opt);
}

// ---------------------------------------------------------------------------
// Imaginary axis

std::vector<AxisBracket> imaginary_axis_scan(const AnalyticFn& f, double gamma_lo, double gamma_hi, int samples) {
  if (!(gamma_hi > gamma_lo) || samples < 2) throw InvalidInput("imaginary-axis scan needs a range and samples");
  auto value = [&f](double g) {
    const Complex j = f(Complex{0.0, -g}).v;
    if (std::abs(j.imag()) > 1e-10 * std::abs(j)) {
      throw ConsistencyError("Wronskian is not real on the imaginary axis");
    }
    return j.real();
  };
  std::vector<AxisBracket> out;
  double g0 = gamma_lo;
  double v0 = value(g0);
  for (int k = 1; k < samples; ++k) {
    const double g1 = gamma_lo + (gamma_hi - gamma_lo) * k / (samples - 1);
    const double v1 = value(g1);
    if (v0 == 0.0) {
      out.push_back({g0, g0, g0});
    } else if ((v0 < 0.0) != (v1 < 0.0) && v1 != 0.0) {
      double lo = g0;
      double hi = g1;
      double flo = v0;
      for (int it = 0; it < 200 && hi - lo > 2e-16 * std::abs(hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = value(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back({g0, g1, 0.5 * (lo + hi)});
    }
    g0 = g1;
    v0 = v1;
  }
  if (v0 == 0.0) out.push_back({g0, g0, g0});
  return out;
}

std::vector<AxisBracket> imaginary_axis_scan(const Potential& v, WronskianKind kind, double gamma_lo,
                                             double gamma_hi, int samples, const WronskianOptions& wopt) {
  const WronskianFn j(v, kind, wopt);
  const AnalyticFn full = [&j](Complex z) { return j(z); };
  if (v.is_piecewise_constant() || !wopt.richardson) return imaginary_axis_scan(full, gamma_lo, gamma_hi, samples);
  // Sampled potentials: locate sign changes with the cheaper plain Wronskian,
  // then refine each on the extrapolated one over a slightly widened bracket.
  WronskianOptions plain = wopt;
  plain.richardson = false;
  const WronskianFn jp(v, kind, plain);
  const auto rough = imaginary_axis_scan([&jp](Complex z) { return jp(z); }, gamma_lo, gamma_hi, samples);
  const double step = (gamma_hi - gamma_lo) / (samples - 1);
  std::vector<AxisBracket> out;
  for (const auto& b : rough) {
    const double lo = std::max(gamma_lo, b.gamma_lo - 0.5 * step);
    const double hi = std::min(gamma_hi, b.gamma_hi + 0.5 * step);
    const auto fine = hi > lo ? imaginary_axis_scan(full, lo, hi, 2) : std::vector<AxisBracket>{};
    out.push_back(fine.size() == 1 ? AxisBracket{b.gamma_lo, b.gamma_hi, fine.front().gamma} : b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coalescence

namespace {

// Along ω = -iγ: dJ/dγ = -i J'(ω), d²J/dγ² = -J''(ω); both real.
struct AxisExtremum {
  double gamma = 0.0;
  double value = 0.0;
};

std::optional<AxisExtremum> extremum_near(const WronskianFn& j, double g, double lo, double hi) {
  for (int it = 0; it < 60; ++it) {
    const Jet v = j(Complex{0.0, -g});
    const double d1 = (-kI * v.d1).real();
    const double d2 = (-v.d2).real();
    if (d2 == 0.0) return std::nullopt;
    const double step = d1 / d2;
    g -= step;
    if (!(g > lo && g < hi)) return std::nullopt;
    if (std::abs(step) <= 1e-15 * (1.0 + g)) break;
  }
  return AxisExtremum{g, j(Complex{0.0, -g}).v.real()};
}

// Extremum between two simple zeros g0 < g1: bisect on the sign of dJ/dγ first.
std::optional<AxisExtremum> extremum_between(const WronskianFn& j, double g0, double g1) {
  auto slope = [&j](double g) { return (-kI * j(Complex{0.0, -g}).d1).real(); };
  double lo = g0;
  double hi = g1;
  const double slo = slope(lo);
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((slope(mid) < 0.0) == (slo < 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return extremum_near(j, 0.5 * (lo + hi), g0, g1);
}

}  // namespace

Coalescence find_coalescence(const std::function<Potential(double)>& family, double param_lo, double param_hi,
                             WronskianKind kind, double gamma_lo, double gamma_hi, const WronskianOptions& wopt) {
  const WronskianFn start(family(param_lo), kind, wopt);
  const auto brackets = imaginary_axis_scan([&start](Complex z) { return start(z); }, gamma_lo, gamma_hi, 400);
  if (brackets.size() < 2) throw NotFoundError("fewer than two imaginary-axis zeros at the start of the range");
  auto ext = extremum_between(start, brackets[0].gamma, brackets[1].gamma);
  if (!ext) throw NotFoundError("no extremum of J between the two zeros");
  const bool sign_lo = ext->value < 0.0;

  double g = ext->gamma;
  auto probe = [&](double p) -> AxisExtremum {
    const WronskianFn j(family(p), kind, wopt);
    auto e = extremum_near(j, g, gamma_lo, gamma_hi);
    if (!e) throw NotFoundError("lost the extremum of J while tracking the family");
    return *e;
  };
  const AxisExtremum at_hi = probe(param_hi);
  if ((at_hi.value < 0.0) == sign_lo) throw NotFoundError("the two zeros do not merge inside the parameter range");

  double lo = param_lo;
  double hi = param_hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const AxisExtremum e = probe(mid);
    g = e.gamma;
    if ((e.value < 0.0) == sign_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Coalescence out;
  out.parameter = 0.5 * (lo + hi);
  const WronskianFn j(family(out.parameter), kind, wopt);
  const AxisExtremum e = probe(out.parameter);
  out.omega = Complex{0.0, -e.gamma};
  const Jet at = j(out.omega);
  out.dJ_abs = std::abs(at.d1);
  out.dJ_scale = std::abs(at.d2) * (1.0 + std::abs(out.omega));
  const double half = 1e-2 * (1.0 + std::abs(out.omega));
  out.multiplicity = count_zeros([&j](Complex z) { return j(z); }, Rect::around(out.omega, half));
  return out;
}

}  // namespace qnmsusy
