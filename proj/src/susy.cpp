#include "qnmsusy/susy.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "qnmsusy/parallel.hpp"
#include "qnmsusy/quadrature.hpp"

namespace qnmsusy {

const char* to_string(EndType e) { return e == EndType::D ? "D" : "I"; }

std::string end_type_label(EndType left, EndType right) {
  return std::string(to_string(left)) + to_string(right);
}

namespace {

int sign(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

// Frequency and Wronskian kind of a function with exterior slopes -W₋ and -W₊.
void frequency_from_ends(double w_minus, double w_plus, double K, Complex& omega, WronskianKind& kind) {
  if (sign(w_minus) == -sign(w_plus)) {
    kind = WronskianKind::Gamma;
    omega = Complex{0.0, w_plus};
  } else {
    kind = w_plus < 0.0 ? WronskianKind::TTM_L : WronskianKind::TTM_R;
    omega = Complex{0.0, -K};
  }
}

void require_joints(const Grid& g, const Potential& v) {
  const auto& breaks = g.break_indices();
  for (const double x : v.breakpoints()) {
    if (!(x > g.lo() && x < g.hi())) continue;
    const bool on_joint = std::any_of(breaks.begin(), breaks.end(), [&](std::size_t i) {
      return std::abs(g[i] - x) <= 1e-12 * (1.0 + std::abs(x));
    });
    if (!on_joint) throw InvalidInput("potential jumps inside a grid piece of the generator");
  }
}

}  // namespace

Generator build_generator(const ModeFunction& mode) {
  const Complex w = mode.omega;
  if (std::abs(w.imag()) <= tol_axis(w)) {
    throw IneligibleGenerator("generator needs Ω² < 0; ω is real or zero", IneligibleGenerator::Reason::NonNegativeOmegaSq);
  }
  if (std::abs(w.real()) > tol_axis(w)) {
    throw IneligibleGenerator("generator frequency is not purely imaginary", IneligibleGenerator::Reason::NotImaginary);
  }
  const double K = std::abs(w.imag());
  const auto nodes = count_nodes_antinodes(mode, Potential::zero(mode.grid.hi()));
  if (nodes.nodes > 0) {
    throw IneligibleGenerator("generator has " + std::to_string(nodes.nodes) + " node(s)",
                              IneligibleGenerator::Reason::Node);
  }
  const std::size_t last = mode.phi.size() - 1;
  const Complex r_left = mode.dphi.front() / mode.phi.front();
  const Complex r_right = mode.dphi[last] / mode.phi[last];
  for (const Complex r : {r_left, r_right}) {
    if (std::abs(r * r - K * K) > 1e-6 * K * K) {
      throw IneligibleGenerator("generator is not purely growing or decaying beyond an end",
                                IneligibleGenerator::Reason::MixedType);
    }
  }

  Generator g;
  g.K = K;
  g.omega = w;
  g.omega_sq = -K * K;
  g.W_minus = r_left.real() > 0.0 ? -K : K;
  g.W_plus = r_right.real() > 0.0 ? -K : K;
  g.left = g.W_minus < 0.0 ? EndType::D : EndType::I;
  g.right = g.W_plus > 0.0 ? EndType::D : EndType::I;
  g.chi = (sign(g.W_plus) - sign(g.W_minus)) / 2;

  // Real phase, positive at -a.
  const Complex rot = std::conj(mode.phi.front()) / std::abs(mode.phi.front());
  g.phi = mode;
  g.phi.norm.reset();
  for (auto& p : g.phi.phi) p *= rot;
  for (auto& d : g.phi.dphi) d *= rot;
  g.W.resize(mode.phi.size());
  for (std::size_t i = 0; i < g.W.size(); ++i) g.W[i] = -(mode.dphi[i] / mode.phi[i]).real();
  g.W.front() = g.W_minus;
  g.W.back() = g.W_plus;
  return g;
}

Candidates candidate_generators(const Potential& v, const Rect& region, std::size_t points) {
  Candidates out;
  if (!region.well_formed() || region.re_lo > 0.0 || region.re_hi < 0.0) return out;
  const Grid grid = Grid::for_potential(v, points);
  constexpr double kGap = 1e-3;
  std::vector<std::pair<double, double>> ranges;
  if (region.im_lo < -kGap) ranges.emplace_back(std::max(-region.im_hi, kGap), -region.im_lo);
  if (region.im_hi > kGap) ranges.emplace_back(-region.im_hi, -std::max(region.im_lo, kGap));
  std::vector<WronskianKind> kinds{WronskianKind::Gamma};
  // With V ≡ 0 every frequency carries a trivial plane wave, so the TTM
  // Wronskians vanish identically.
  if (v.max_abs() > 0.0) {
    kinds.push_back(WronskianKind::TTM_L);
    kinds.push_back(WronskianKind::TTM_R);
  }
  for (const auto kind : kinds) {
    for (const auto& [lo, hi] : ranges) {
      if (!(hi > lo)) continue;
      const int samples = std::max(64, static_cast<int>(std::ceil(200.0 * (hi - lo))));
      for (const auto& b : imaginary_axis_scan(v, kind, lo, hi, samples)) {
        const Complex w{0.0, -b.gamma};
        const auto mode = eigenmode(v, w, kind, grid);
        try {
          out.eligible.push_back(build_generator(mode));
        } catch (const IneligibleGenerator& e) {
          out.rejected.push_back({w, kind, e.reason(), e.what()});
        }
      }
    }
  }
  auto key = [](WronskianKind k, Complex w) { return std::make_pair(static_cast<int>(k), w.imag()); };
  std::sort(out.eligible.begin(), out.eligible.end(),
            [&](const Generator& a, const Generator& b) { return key(a.phi.kind, a.omega) < key(b.phi.kind, b.omega); });
  std::sort(out.rejected.begin(), out.rejected.end(), [&](const RejectedCandidate& a, const RejectedCandidate& b) {
    return key(a.kind, a.omega) < key(b.kind, b.omega);
  });
  return out;
}

Potential partner_potential(const Generator& gen, const Potential& v) {
  const Grid& g = gen.phi.grid;
  if (std::abs(g.hi() - v.half_width()) > 1e-12 * v.half_width()) {
    throw InvalidInput("generator grid does not span the support of the potential");
  }
  require_joints(g, v);
  std::vector<SampledPiece> pieces;
  for (std::size_t p = 0; p < g.piece_count(); ++p) {
    const std::size_t b = g.piece_begin(p);
    const std::size_t e = g.piece_end(p);
    SampledPiece piece;
    piece.x_lo = g[b];
    piece.x_hi = g[e];
    piece.values.resize(e - b + 1);
    for (std::size_t i = b; i <= e; ++i) {
      double vx = v(g[i]);
      if (i == b) vx = v.limit(g[i], Side::Right);
      if (i == e) vx = v.limit(g[i], Side::Left);
      piece.values[i - b] = 2.0 * (gen.W[i] * gen.W[i] + gen.omega_sq) - vx;
    }
    pieces.push_back(std::move(piece));
  }
  return Potential::sampled(std::move(pieces));
}

std::vector<Complex> apply_A(const Generator& gen, const std::vector<Complex>& f, const std::vector<Complex>& df) {
  if (f.size() != gen.W.size() || df.size() != gen.W.size()) throw InvalidInput("function does not match the grid");
  std::vector<Complex> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = df[i] + gen.W[i] * f[i];
  return out;
}

std::vector<Complex> apply_A_adjoint(const Generator& gen, const std::vector<Complex>& f,
                                     const std::vector<Complex>& df) {
  if (f.size() != gen.W.size() || df.size() != gen.W.size()) throw InvalidInput("function does not match the grid");
  std::vector<Complex> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = -df[i] + gen.W[i] * f[i];
  return out;
}

MappedMode map_state(const Generator& gen, const ModeFunction& m) {
  if (!(m.grid == gen.phi.grid)) throw InvalidInput("mode and generator live on different grids");
  MappedMode out;
  out.mode = m;
  out.mode.norm.reset();
  out.mode.phi = apply_A(gen, m.phi, m.dphi);
  const Complex w2 = m.omega * m.omega;
  double size = 0.0;
  double mapped = 0.0;
  for (std::size_t i = 0; i < m.phi.size(); ++i) {
    const double W = gen.W[i];
    out.mode.dphi[i] = (W * W + gen.omega_sq - w2) * m.phi[i] + W * m.dphi[i];
    size = std::max(size, std::abs(m.dphi[i]) + std::abs(W * m.phi[i]));
    mapped = std::max(mapped, std::abs(out.mode.phi[i]));
  }
  out.annihilated = mapped <= 1e-8 * size;
  return out;
}

ModeFunction map_state_normalized(const Generator& gen, const ModeFunction& m) {
  const Complex plus{0.0, gen.K};
  if (std::abs(m.omega - plus) < 1e-6 || std::abs(m.omega + plus) < 1e-6) {
    throw ExcludedSubspaceError("states at ±iK are outside the domain of the normalized map");
  }
  auto mapped = map_state(gen, m).mode;
  const Complex n = 1.0 / std::sqrt(m.omega * m.omega - gen.omega_sq);
  for (auto& p : mapped.phi) p *= n;
  for (auto& d : mapped.dphi) d *= n;
  const Complex before = m.norm ? *m.norm : qnm_norm(m);
  const Complex after = qnm_norm(mapped);
  const double tol = is_zero_norm(m) ? 1e-6 * norm_scale(m) : 1e-6 * std::abs(before);
  if (std::abs(after - before) > tol) {
    throw ConsistencyError("normalized SUSY map changed the generalized norm");
  }
  mapped.norm = after;
  return mapped;
}

TwoComponentState map_twocomponent(const Generator& gen, const TwoComponentState& s) {
  if (!s.psi2_left.empty()) throw InvalidInput("second component must be continuous");
  if (!(s.grid == gen.phi.grid)) throw InvalidInput("state and generator live on different grids");
  TwoComponentState out;
  out.grid = s.grid;
  out.psi1 = apply_A(gen, s.psi1, differentiate(s.grid, s.psi1));
  out.psi2 = apply_A(gen, s.psi2, differentiate(s.grid, s.psi2));
  return out;
}

TwoComponentState map_twocomponent_adjoint(const Generator& gen, const TwoComponentState& s) {
  if (!s.psi2_left.empty()) throw InvalidInput("second component must be continuous");
  if (!(s.grid == gen.phi.grid)) throw InvalidInput("state and generator live on different grids");
  TwoComponentState out;
  out.grid = s.grid;
  out.psi1 = apply_A_adjoint(gen, s.psi1, differentiate(s.grid, s.psi1));
  out.psi2 = apply_A_adjoint(gen, s.psi2, differentiate(s.grid, s.psi2));
  return out;
}

Generator reverse_generator(const Generator& gen) {
  Generator r = gen;
  for (std::size_t i = 0; i < gen.W.size(); ++i) {
    const Complex p = gen.phi.phi[i];
    r.phi.phi[i] = 1.0 / p;
    r.phi.dphi[i] = -gen.phi.dphi[i] / (p * p);
    r.W[i] = -gen.W[i];
  }
  r.W_minus = -gen.W_minus;
  r.W_plus = -gen.W_plus;
  r.left = gen.left == EndType::D ? EndType::I : EndType::D;
  r.right = gen.right == EndType::D ? EndType::I : EndType::D;
  r.chi = -gen.chi;
  frequency_from_ends(r.W_minus, r.W_plus, r.K, r.omega, r.phi.kind);
  r.phi.omega = r.omega;
  r.phi.classification = r.phi.kind == WronskianKind::Gamma ? classify(r.omega) : ModeClass::TTM;
  r.phi.norm.reset();
  return r;
}

double generator_residual(const Generator& gen, const Potential& v) {
  const Grid& g = gen.phi.grid;
  std::vector<Complex> left;
  const auto d2 = differentiate2(g, gen.phi.phi, &left);
  double res = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Complex rhs = (v(g[i]) - gen.omega_sq) * gen.phi.phi[i];
    res = std::max(res, std::abs(d2[i] - rhs));
    scale = std::max(scale, std::abs(rhs));
  }
  const auto& breaks = g.break_indices();
  for (std::size_t k = 0; k < left.size(); ++k) {
    const std::size_t i = breaks[k + 1];
    const Complex rhs = (v.limit(g[i], Side::Left) - gen.omega_sq) * gen.phi.phi[i];
    res = std::max(res, std::abs(left[k] - rhs));
  }
  return scale == 0.0 ? res : res / scale;
}

SpectralLedger spectral_ledger(const Generator& gen, const Potential& v, const Potential& v_tilde) {
  SpectralLedger out;
  out.chi = gen.chi;
  const Complex plus{0.0, gen.K};
  double r = std::min(0.05, 0.25 * gen.K);
  for (int attempt = 0;; ++attempt) {
    try {
      out.radius = r;
      out.n_plus = count_zeros(v, Rect::around(plus, r), WronskianKind::Gamma);
      out.n_minus = count_zeros(v, Rect::around(-plus, r), WronskianKind::Gamma);
      out.nt_plus = count_zeros(v_tilde, Rect::around(plus, r), WronskianKind::Gamma);
      out.nt_minus = count_zeros(v_tilde, Rect::around(-plus, r), WronskianKind::Gamma);
      break;
    } catch (const ContourError&) {
      if (attempt == 4) throw;
      r *= 0.37;
    }
  }
  out.delta_plus = out.n_plus - out.nt_plus;
  out.delta_minus = out.n_minus - out.nt_minus;
  if (out.delta_plus != gen.chi || out.delta_minus != -gen.chi) {
    throw ConsistencyError("contour counts at ±iK disagree with the generator type: Δ(iK) = " +
                           std::to_string(out.delta_plus) + ", Δ(-iK) = " + std::to_string(out.delta_minus) +
                           ", χ = " + std::to_string(gen.chi));
  }
  return out;
}

SpectralLedger spectral_ledger(const Generator& gen, const Potential& v) {
  return spectral_ledger(gen, v, partner_potential(gen, v));
}

IntertwiningCheck verify_intertwining(const Potential& v, const Potential& v_tilde, const Generator& gen,
                                      const std::vector<Complex>& samples, const WronskianOptions& wopt) {
  const WronskianFn j(v, WronskianKind::Gamma, wopt);
  const WronskianFn jt(v_tilde, WronskianKind::Gamma, wopt);
  const Complex omega = kI * static_cast<double>(gen.chi) * gen.K;
  const Complex plus{0.0, gen.K};
  auto near_zero = [](const Jet& x) { return std::abs(x.v) <= 1e-6 * std::abs(x.d1); };
  const auto residuals = parallel_map(samples, [&](Complex w) -> std::optional<double> {
    if (std::abs(w - plus) < 1e-3 || std::abs(w + plus) < 1e-3) return std::nullopt;
    const Jet a = j(w);
    const Jet b = jt(w);
    if (near_zero(a) || near_zero(b)) return std::nullopt;
    const Complex rhs = (w + omega) * a.v;
    return std::abs((w - omega) * b.v - rhs) / std::abs(rhs);
  });
  IntertwiningCheck out;
  out.omega_eff = omega;
  for (const auto& r : residuals) {
    if (!r) {
      ++out.skipped;
      continue;
    }
    ++out.used;
    out.max_residual = std::max(out.max_residual, *r);
  }
  return out;
}

Jet unnormalized_partner_wronskian(const Generator& gen, const Potential& v, Complex omega, WronskianKind kind) {
  const Grid& g = gen.phi.grid;
  const std::size_t i = g.nearest(0.0);
  const double x = g[i];
  const double W = gen.W[i];
  const Jet w = Jet::variable(omega);
  const Jet shift = Jet{W * W + gen.omega_sq} - w * w;
  auto mapped = [&](BoundaryKind b) {
    const JetState s = propagate_to(v, omega, b, x);
    return JetState{s.dphi + W * s.phi, shift * s.phi + W * s.dphi};
  };
  const JetState f = mapped(left_kind(kind));
  const JetState h = mapped(right_kind(kind));
  return f.dphi * h.phi - f.phi * h.dphi;
}

}  // namespace qnmsusy
