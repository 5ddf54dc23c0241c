#include "qnmsusy/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qnmsusy/errors.hpp"

namespace qnmsusy {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

// Index of the entry whose half-open interval [lo, hi) holds x; the last
// interval is closed. Caller guarantees |x| <= a.
template <typename Range, typename LoOf>
std::size_t locate(const Range& r, double x, LoOf lo_of) {
  auto it = std::upper_bound(r.begin(), r.end(), x,
                             [&](double value, const auto& e) { return value < lo_of(e); });
  if (it == r.begin()) return 0;
  return static_cast<std::size_t>(std::distance(r.begin(), it)) - 1;
}

double interpolate(const SampledPiece& p, double x) {
  const std::size_t cells = p.cells();
  const double t = (x - p.x_lo) / p.spacing();
  auto i = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
  if (i >= cells) i = cells - 1;
  const double frac = t - static_cast<double>(i);
  return p.values[i] + frac * (p.values[i + 1] - p.values[i]);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double SampledPiece::node(std::size_t k) const {
  if (k == cells()) return x_hi;
  return x_lo + (x_hi - x_lo) * static_cast<double>(k) / static_cast<double>(cells());
}

Potential Potential::piecewise_constant(std::vector<Segment> segments) {
  require(!segments.empty(), "potential needs at least one segment");
  const double a = segments.back().x_hi;
  require(a > 0.0 && std::isfinite(a), "half-width must be positive and finite");
  require(segments.front().x_lo == -a, "segments must start at -a and end at +a");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    require(s.x_lo < s.x_hi, "segment with non-positive length");
    require(std::isfinite(s.value), "segment value must be finite");
    if (i > 0) require(segments[i - 1].x_hi == s.x_lo, "segments must tile [-a, a] without gaps or overlaps");
  }
  Potential out;
  out.form_ = Form::PiecewiseConstant;
  out.half_width_ = a;
  out.segments_ = std::move(segments);
  return out;
}

Potential Potential::sampled(std::vector<SampledPiece> pieces) {
  require(!pieces.empty(), "sampled potential needs at least one piece");
  const double a = pieces.back().x_hi;
  require(a > 0.0 && std::isfinite(a), "half-width must be positive and finite");
  require(pieces.front().x_lo == -a, "samples must start at -a and end at +a");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    require(p.values.size() >= 2, "each sampled piece needs at least two samples");
    require(p.x_lo < p.x_hi, "sample abscissae must be strictly increasing");
    for (double v : p.values) require(std::isfinite(v), "sample values must be finite");
    if (i > 0) require(pieces[i - 1].x_hi == p.x_lo, "sampled pieces must be contiguous");
  }
  Potential out;
  out.form_ = Form::Sampled;
  out.half_width_ = a;
  out.pieces_ = std::move(pieces);
  return out;
}

Potential Potential::sampled_uniform(double half_width, std::vector<double> values) {
  return sampled({SampledPiece{-half_width, half_width, std::move(values)}});
}

Potential Potential::zero(double half_width) {
  return piecewise_constant({Segment{-half_width, half_width, 0.0}});
}

double Potential::operator()(double x) const {
  if (!(std::abs(x) <= half_width_)) return 0.0;
  if (form_ == Form::PiecewiseConstant) {
    return segments_[locate(segments_, x, [](const Segment& s) { return s.x_lo; })].value;
  }
  const auto& p = pieces_[locate(pieces_, x, [](const SampledPiece& s) { return s.x_lo; })];
  return interpolate(p, x);
}

double Potential::limit(double x, Side side) const {
  const double a = half_width_;
  if (side == Side::Right && x >= a) return 0.0;
  if (side == Side::Left && x <= -a) return 0.0;
  if (std::abs(x) > a) return 0.0;
  if (form_ == Form::PiecewiseConstant) {
    std::size_t i = locate(segments_, x, [](const Segment& s) { return s.x_lo; });
    if (side == Side::Left && i > 0 && x == segments_[i].x_lo) --i;
    return segments_[i].value;
  }
  std::size_t i = locate(pieces_, x, [](const SampledPiece& s) { return s.x_lo; });
  if (side == Side::Left && i > 0 && x == pieces_[i].x_lo) --i;
  return interpolate(pieces_[i], x);
}

std::vector<double> Potential::knots() const {
  std::vector<double> out;
  if (form_ == Form::PiecewiseConstant) {
    out.reserve(segments_.size() + 1);
    for (const auto& s : segments_) out.push_back(s.x_lo);
    out.push_back(segments_.back().x_hi);
    return out;
  }
  for (const auto& p : pieces_) {
    for (std::size_t k = 0; k < p.cells(); ++k) out.push_back(p.node(k));
  }
  out.push_back(pieces_.back().x_hi);
  return out;
}

std::vector<double> Potential::breakpoints() const {
  std::vector<double> out;
  if (form_ == Form::PiecewiseConstant) {
    for (const auto& s : segments_) out.push_back(s.x_lo);
    out.push_back(segments_.back().x_hi);
  } else {
    for (const auto& p : pieces_) out.push_back(p.x_lo);
    out.push_back(pieces_.back().x_hi);
  }
  return out;
}

bool Potential::coarsenable() const {
  if (form_ != Form::Sampled) return false;
  return std::all_of(pieces_.begin(), pieces_.end(),
                     [](const SampledPiece& p) { return p.cells() % 2 == 0 && p.cells() >= 4; });
}

Potential Potential::coarsened() const {
  require(coarsenable(), "coarsening needs a sampled potential with even cell counts");
  std::vector<SampledPiece> out;
  out.reserve(pieces_.size());
  for (const auto& p : pieces_) {
    SampledPiece c{p.x_lo, p.x_hi, {}};
    c.values.reserve(p.cells() / 2 + 1);
    for (std::size_t k = 0; k < p.values.size(); k += 2) c.values.push_back(p.values[k]);
    out.push_back(std::move(c));
  }
  return sampled(std::move(out));
}

double Potential::max_abs() const {
  double m = 0.0;
  for (const auto& s : segments_) m = std::max(m, std::abs(s.value));
  for (const auto& p : pieces_)
    for (double v : p.values) m = std::max(m, std::abs(v));
  return m;
}

Potential reflect(const Potential& v) {
  if (v.is_piecewise_constant()) {
    std::vector<Segment> segs;
    segs.reserve(v.segments().size());
    for (auto it = v.segments().rbegin(); it != v.segments().rend(); ++it) {
      segs.push_back({-it->x_hi, -it->x_lo, it->value});
    }
    return Potential::piecewise_constant(std::move(segs));
  }
  std::vector<SampledPiece> pieces;
  pieces.reserve(v.pieces().size());
  for (auto it = v.pieces().rbegin(); it != v.pieces().rend(); ++it) {
    SampledPiece p{-it->x_hi, -it->x_lo, {it->values.rbegin(), it->values.rend()}};
    pieces.push_back(std::move(p));
  }
  return Potential::sampled(std::move(pieces));
}

namespace {

Potential add_piecewise(const Potential& v, const Potential& dv) {
  std::vector<double> cuts = v.breakpoints();
  const auto other = dv.breakpoints();
  cuts.insert(cuts.end(), other.begin(), other.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    segs.push_back({cuts[i], cuts[i + 1], v(mid) + dv(mid)});
  }
  return Potential::piecewise_constant(std::move(segs));
}

Potential add_to_samples(const Potential& sampled, const Potential& other) {
  std::vector<SampledPiece> pieces = sampled.pieces();
  if (other.is_piecewise_constant()) {
    for (double b : other.breakpoints()) {
      for (const auto& p : pieces) {
        require(!(b > p.x_lo && b < p.x_hi),
                "perturbation has a step inside a sampled piece; resample the potential first");
      }
    }
  } else {
    require(other.pieces().size() == pieces.size(), "sampled operands must share their sample layout");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const auto& q = other.pieces()[i];
      require(q.x_lo == pieces[i].x_lo && q.x_hi == pieces[i].x_hi && q.values.size() == pieces[i].values.size(),
              "sampled operands must share their sample layout");
    }
  }
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto& p = pieces[i];
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      double add = 0.0;
      if (other.is_piecewise_constant()) {
        // Take the limit from inside this piece so steps at piece ends stay put.
        const Side side = (k == p.cells()) ? Side::Left : Side::Right;
        add = other.limit(p.node(k), side);
      } else {
        add = other.pieces()[i].values[k];
      }
      p.values[k] += add;
    }
  }
  return Potential::sampled(std::move(pieces));
}

}  // namespace

Potential perturb(const Potential& v, const Potential& dv) {
  if (v.half_width() != dv.half_width()) {
    throw InvalidInput("perturbation support must match the potential's support");
  }
  if (v.is_piecewise_constant() && dv.is_piecewise_constant()) return add_piecewise(v, dv);
  if (!v.is_piecewise_constant()) return add_to_samples(v, dv);
  return add_to_samples(dv, v);
}

Potential square_barrier(double height, double half_width) {
  return Potential::piecewise_constant({Segment{-half_width, half_width, height}});
}

Potential multi_step_barrier() {
  return Potential::piecewise_constant({Segment{-1.0, -0.1, 1.0},
                                        Segment{-0.1, 0.1, -10.0},
                                        Segment{0.1, 1.0, 1.0}});
}

Potential load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open sample file " + path.string());
  std::vector<std::vector<std::pair<double, double>>> groups(1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x = 0.0;
    double val = 0.0;
    if (!(ls >> x)) continue;
    require(static_cast<bool>(ls >> val), "sample file line " + std::to_string(lineno) + ": expected two columns");
    auto& cur = groups.back();
    if (!cur.empty() && x == cur.back().first) {
      groups.push_back({{x, val}});
      continue;
    }
    require(cur.empty() || x > cur.back().first,
            "sample file line " + std::to_string(lineno) + ": abscissae must increase");
    cur.push_back({x, val});
  }
  std::vector<SampledPiece> pieces;
  for (const auto& g : groups) {
    require(g.size() >= 2, "every sampled piece needs at least two samples");
    SampledPiece p{g.front().first, g.back().first, {}};
    const double h = p.x_hi - p.x_lo;
    const auto cells = static_cast<double>(g.size() - 1);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double expect = p.x_lo + h * static_cast<double>(k) / cells;
      require(std::abs(g[k].first - expect) <= 1e-9 * h, "samples must be uniformly spaced within each piece");
      p.values.push_back(g[k].second);
    }
    pieces.push_back(std::move(p));
  }
  const double a = pieces.back().x_hi;
  require(std::abs(pieces.front().x_lo + a) <= 1e-12 * a, "samples must span a symmetric interval [-a, a]");
  pieces.front().x_lo = -a;
  return Potential::sampled(std::move(pieces));
}

std::string format_samples(const Potential& v) {
  std::string out;
  auto emit = [&out](double x, double val) { out += fmt17(x) + ' ' + fmt17(val) + '\n'; };
  if (v.is_piecewise_constant()) {
    for (const auto& s : v.segments()) {
      emit(s.x_lo, s.value);
      emit(s.x_hi, s.value);
    }
    return out;
  }
  for (const auto& p : v.pieces()) {
    for (std::size_t k = 0; k < p.values.size(); ++k) emit(p.node(k), p.values[k]);
  }
  return out;
}

void save_samples(const std::filesystem::path& path, const Potential& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << format_samples(v);
}

}  // namespace qnmsusy
