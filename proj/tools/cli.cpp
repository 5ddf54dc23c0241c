#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "qnmsusy/errors.hpp"
#include "qnmsusy/jordan.hpp"
#include "qnmsusy/modes.hpp"
#include "qnmsusy/parallel.hpp"
#include "qnmsusy/susy.hpp"

namespace qnmsusy::cli {

using nlohmann::ordered_json;

namespace {

const std::vector<std::pair<Task, std::string>>& task_table() {
  static const std::vector<std::pair<Task, std::string>> t{
      {Task::Spectrum, "spectrum"}, {Task::Generators, "generators"}, {Task::Partner, "partner"},
      {Task::Verify, "verify"},     {Task::Jordan, "jordan"},         {Task::Sweep, "sweep"},
      {Task::EmitFigure, "emit-figure"}};
  return t;
}

// ---------------------------------------------------------------- config

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void allow_keys(const toml::table& t, const std::string& where, std::initializer_list<std::string_view> keys) {
  for (auto&& [k, v] : t) {
    (void)v;
    if (std::find(keys.begin(), keys.end(), k.str()) == keys.end()) {
      fail("unknown key '" + std::string(k.str()) + "' in " + where);
    }
  }
}

const toml::table* sub_table(const toml::table& t, std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return nullptr;
  if (!n->is_table()) fail("'" + std::string(key) + "' must be a table");
  return n->as_table();
}

double number(const toml::node& n, const std::string& what) {
  if (!n.is_number()) fail(what + " must be a number");
  const auto d = n.value<double>();
  if (!d || !std::isfinite(*d)) fail(what + " must be finite");
  return *d;
}

std::optional<double> opt_number(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  return number(*n, where + "." + std::string(key));
}

std::optional<long long> opt_integer(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if (!n->is_integer()) fail(where + "." + std::string(key) + " must be an integer");
  return *n->value<long long>();
}

std::optional<std::string> opt_string(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if (!n->is_string()) fail(where + "." + std::string(key) + " must be a string");
  return *n->value<std::string>();
}

std::pair<double, double> interval(const toml::table& t, std::string_view key, const std::string& where) {
  const std::string name = where + "." + std::string(key);
  const toml::node* n = t.get(key);
  if (n == nullptr) fail(name + " is required");
  const toml::array* a = n->as_array();
  if (a == nullptr || a->size() != 2) fail(name + " must be [lo, hi]");
  const double lo = number(*a->get(0), name + "[0]");
  const double hi = number(*a->get(1), name + "[1]");
  if (!(lo < hi)) fail(name + " must satisfy lo < hi");
  return {lo, hi};
}

Potential parse_potential(const toml::table& t, const std::filesystem::path& base_dir) {
  allow_keys(t, "[potential]", {"segments", "samples"});
  const toml::node* seg = t.get("segments");
  const toml::node* smp = t.get("samples");
  if ((seg == nullptr) == (smp == nullptr)) fail("[potential] needs exactly one of 'segments' or 'samples'");
  try {
    if (smp != nullptr) {
      if (!smp->is_string()) fail("potential.samples must be a path string");
      std::filesystem::path p = *smp->value<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return load_samples(p);
    }
    const toml::array* rows = seg->as_array();
    if (rows == nullptr || rows->empty()) fail("potential.segments must be a non-empty array");
    std::vector<Segment> segments;
    for (std::size_t i = 0; i < rows->size(); ++i) {
      const std::string name = "potential.segments[" + std::to_string(i) + "]";
      const toml::array* r = rows->get(i)->as_array();
      if (r == nullptr || r->size() != 3) fail(name + " must be [x_lo, x_hi, value]");
      segments.push_back({number(*r->get(0), name), number(*r->get(1), name), number(*r->get(2), name)});
    }
    return Potential::piecewise_constant(std::move(segments));
  } catch (const InvalidInput& e) {
    fail(std::string("potential: ") + e.what());
  }
}

bool power_of_two_plus_one(long long n) {
  const long long m = n - 1;
  return m > 0 && (m & (m - 1)) == 0;
}

void check_grid(long long n) {
  if (n < 129 || !power_of_two_plus_one(n)) {
    fail("grid must be at least 129 and a power of two plus one (got " + std::to_string(n) + ")");
  }
}

// ---------------------------------------------------------------- output

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ordered_json cj(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

const char* reason_name(IneligibleGenerator::Reason r) {
  switch (r) {
    case IneligibleGenerator::Reason::Node: return "node";
    case IneligibleGenerator::Reason::NonNegativeOmegaSq: return "non_negative_omega_sq";
    case IneligibleGenerator::Reason::NotImaginary: return "not_imaginary";
    case IneligibleGenerator::Reason::MixedType: return "mixed_type";
  }
  return "?";
}

FindOptions find_options(const RunConfig& cfg) {
  FindOptions o;
  o.contour.tol_root = cfg.tol_root;
  return o;
}

ModeClass classify_root(const RunConfig& cfg, Complex z, WronskianKind kind) {
  if (kind != WronskianKind::Gamma) return ModeClass::TTM;
  return classify(z, cfg.tol_axis * (1.0 + std::abs(z)));
}

bool on_axis(const RunConfig& cfg, Complex z) { return std::abs(z.real()) <= cfg.tol_axis * (1.0 + std::abs(z)); }

Complex snapped(const RunConfig& cfg, Complex z) { return on_axis(cfg, z) ? Complex{0.0, z.imag()} : z; }

void sort_roots(std::vector<Root>& roots) {
  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    if (a.omega.imag() != b.omega.imag()) return a.omega.imag() > b.omega.imag();
    return a.omega.real() < b.omega.real();
  });
}

SpectrumReport spectrum(const RunConfig& cfg, const Potential& v, const Rect& r, WronskianKind kind) {
  auto rep = find_roots(v, r, kind, find_options(cfg));
  for (auto& root : rep.roots) root.classification = classify_root(cfg, root.omega, kind);
  sort_roots(rep.roots);
  return rep;
}

ordered_json rect_json(const Rect& r) {
  return {{"re", {r.re_lo, r.re_hi}}, {"im", {r.im_lo, r.im_hi}}};
}

ordered_json spectrum_json(const SpectrumReport& rep) {
  ordered_json roots = ordered_json::array();
  for (const auto& r : rep.roots) {
    roots.push_back({{"re", r.omega.real()},
                     {"im", r.omega.imag()},
                     {"multiplicity", r.multiplicity},
                     {"class", to_string(r.classification)},
                     {"residual", r.residual}});
  }
  ordered_json j{{"kind", to_string(rep.kind)},
                 {"contour", rect_json(rep.contour)},
                 {"roots", roots},
                 {"counting_total", rep.counting_total},
                 {"complete", rep.complete}};
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

ordered_json generator_json(const Generator& g) {
  return {{"omega", cj(g.omega)}, {"kind", to_string(g.phi.kind)}, {"type", g.type()}, {"chi", g.chi},
          {"K", g.K},             {"W_minus", g.W_minus},          {"W_plus", g.W_plus}};
}

ordered_json ledger_json(const SpectralLedger& l) {
  return {{"delta_plus", l.delta_plus}, {"delta_minus", l.delta_minus}, {"chi", l.chi},
          {"n_plus", l.n_plus},         {"n_minus", l.n_minus},         {"nt_plus", l.nt_plus},
          {"nt_minus", l.nt_minus},     {"radius", l.radius}};
}

/// The eligible generator at the axis zero of the chosen kind nearest omega_im.
Generator select_generator(const RunConfig& cfg) {
  const auto& choice = *cfg.generator;
  const Complex guess{0.0, choice.omega_im};
  const double half = std::max(0.05, 0.05 * std::abs(choice.omega_im));
  const auto rep = find_roots(cfg.potential, Rect::around(guess, half), choice.kind, find_options(cfg));
  if (rep.roots.empty()) {
    throw NotFoundError("no " + std::string(to_string(choice.kind)) + " zero within " + num(half) + " of " +
                        num(choice.omega_im) + "i");
  }
  const auto best = std::min_element(rep.roots.begin(), rep.roots.end(), [&](const Root& a, const Root& b) {
    return std::abs(a.omega - guess) < std::abs(b.omega - guess);
  });
  const Complex w{0.0, best->omega.imag()};
  return build_generator(eigenmode(cfg.potential, w, choice.kind, cfg.grid));
}

/// Roots closer than 1e-4 |ω| merged into one of summed multiplicity.
std::vector<Root> merge_close(std::vector<Root> roots) {
  sort_roots(roots);
  std::vector<Root> out;
  for (const auto& r : roots) {
    if (!out.empty() && std::abs(out.back().omega - r.omega) < 1e-4 * std::max(std::abs(r.omega), 1e-4)) {
      auto& m = out.back();
      m.omega = 0.5 * (m.omega + r.omega);
      m.multiplicity += r.multiplicity;
      continue;
    }
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------- tasks

RunResult task_spectrum(const RunConfig& cfg) {
  RunResult res;
  const auto reports = parallel_map(cfg.kinds, [&](WronskianKind k) { return spectrum(cfg, cfg.potential, cfg.region, k); });
  for (const auto& rep : reports) {
    res.files["spectrum_" + lower(to_string(rep.kind)) + ".json"] = dump(spectrum_json(rep));
    if (rep.kind != WronskianKind::Gamma) continue;
    const auto rows = parallel_map(rep.roots, [&](const Root& r) {
      const Complex w = snapped(cfg, r.omega);
      const auto m = eigenmode(cfg.potential, w, WronskianKind::Gamma, cfg.grid);
      const auto nc = count_nodes_antinodes(m, cfg.potential);
      return ordered_json{{"omega", cj(w)},
                          {"class", to_string(r.classification)},
                          {"multiplicity", r.multiplicity},
                          {"norm", cj(qnm_norm(m))},
                          {"nodes", nc.nodes},
                          {"antinodes", nc.antinodes}};
    });
    res.files["modes.json"] = dump(ordered_json{{"modes", rows}});
  }
  return res;
}

RunResult task_generators(const RunConfig& cfg) {
  const auto c = candidate_generators(cfg.potential, cfg.region, cfg.grid);
  ordered_json eligible = ordered_json::array();
  for (const auto& g : c.eligible) eligible.push_back(generator_json(g));
  ordered_json rejected = ordered_json::array();
  for (const auto& r : c.rejected) {
    rejected.push_back({{"omega", cj(r.omega)}, {"kind", to_string(r.kind)}, {"reason", reason_name(r.reason)},
                        {"message", r.message}});
  }
  RunResult res;
  res.files["generators.json"] =
      dump(ordered_json{{"region", rect_json(cfg.region)}, {"eligible", eligible}, {"rejected", rejected}});
  return res;
}

RunResult task_partner(const RunConfig& cfg) {
  const auto gen = select_generator(cfg);
  const auto vt = partner_potential(gen, cfg.potential);
  const auto ledger = spectral_ledger(gen, cfg.potential, vt);
  RunResult res;
  res.files["partner.txt"] = format_samples(vt);
  res.files["partner.json"] = dump(ordered_json{
      {"generator", generator_json(gen)}, {"ledger", ledger_json(ledger)}, {"samples_file", "partner.txt"}});
  return res;
}

RunResult task_verify(const RunConfig& cfg) {
  constexpr double kIntertwiningTol = 1e-6;
  constexpr double kNormRatioTol = 1e-6;
  constexpr std::size_t kMaxModes = 8;
  const auto gen = select_generator(cfg);
  const auto& v = cfg.potential;
  const auto vt = partner_potential(gen, v);
  const auto ledger = spectral_ledger(gen, v, vt);

  std::vector<Complex> samples;
  const Rect& r = cfg.region;
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k < 8; ++k) {
      samples.emplace_back(r.re_lo + (i + 0.5) * r.width() / 8.0, r.im_lo + (k + 0.5) * r.height() / 8.0);
    }
  }
  const auto inter = verify_intertwining(v, vt, gen, samples);
  const bool inter_ok = inter.max_residual <= kIntertwiningTol && inter.used >= 50;

  // Common Γ states away from ±iK, nearest the origin first.
  auto roots = spectrum(cfg, v, cfg.region, WronskianKind::Gamma).roots;
  std::erase_if(roots, [&](const Root& x) {
    return x.multiplicity != 1 || std::abs(x.omega - Complex{0.0, gen.K}) < 1e-3 ||
           std::abs(x.omega + Complex{0.0, gen.K}) < 1e-3;
  });
  std::stable_sort(roots.begin(), roots.end(),
                   [](const Root& a, const Root& b) { return std::abs(a.omega) < std::abs(b.omega); });
  if (roots.size() > kMaxModes) roots.resize(kMaxModes);
  const auto rows = parallel_map(roots, [&](const Root& x) {
    const Complex w = snapped(cfg, x.omega);
    const auto m = eigenmode(v, w, WronskianKind::Gamma, gen.phi.grid);
    const auto mt = map_state(gen, m).mode;
    const Complex ratio = qnm_norm(mt) / qnm_norm(m);
    const Complex expected = w * w - gen.omega_sq;
    return ordered_json{{"omega", cj(w)},
                        {"ratio", cj(ratio)},
                        {"expected", cj(expected)},
                        {"rel_error", std::abs(ratio - expected) / std::abs(expected)}};
  });
  double worst = 0.0;
  for (const auto& row : rows) worst = std::max(worst, row["rel_error"].get<double>());
  const bool norm_ok = !rows.empty() && worst <= kNormRatioTol;

  RunResult res;
  res.checks_failed = !(inter_ok && norm_ok);
  res.files["verify.json"] = dump(ordered_json{
      {"generator", generator_json(gen)},
      {"ledger", ledger_json(ledger)},
      {"intertwining",
       {{"samples", samples.size()},
        {"used", inter.used},
        {"skipped", inter.skipped},
        {"omega_eff", cj(inter.omega_eff)},
        {"max_residual", inter.max_residual},
        {"tolerance", kIntertwiningTol},
        {"passed", inter_ok}}},
      {"norm_ratio", {{"modes", rows}, {"max_rel_error", worst}, {"tolerance", kNormRatioTol}, {"passed", norm_ok}}},
      {"passed", !res.checks_failed}});
  return res;
}

ordered_json jordan_block(const RunConfig& cfg, const BlockCandidate& c) {
  const auto policy = cfg.plain_alpha ? AlphaPolicy::Plain : AlphaPolicy::SmallerRoot;
  const auto& v = cfg.potential;
  const Grid grid = Grid::for_potential(v, cfg.grid);
  const Complex w = snapped(cfg, c.omega);
  const auto b = build_block_basis(v, w, grid, policy);

  ordered_json checks{{"eq53_residual", b.chain_residual}, {"norm_ratio_error", nullptr},
                      {"annihilation_residual", nullptr}};
  ordered_json j{{"omega", cj(w)},
                 {"M", b.order},
                 {"alpha",
                  {{"re", b.alpha.real()},
                   {"im", b.alpha.imag()},
                   {"root_choice", to_string(policy)},
                   {"roots", {cj(b.alpha_roots[0]), cj(b.alpha_roots[1])}}}},
                 {"block_norm", cj(b.block_norm)},
                 {"merged_pair", c.merged_pair}};

  // A double zero on the negative imaginary axis is the image of a QNM at -Ω
  // under the NM generator Φ = 1/φ(ω*); rebuild that pair and check the block
  // relations through it.
  if (w.real() == 0.0 && w.imag() < 0.0) {
    const auto forward = build_generator(eigenmode(v, w, WronskianKind::Gamma, grid));
    const auto h = partner_potential(forward, v);
    const auto gen = reverse_generator(forward);
    const auto near = find_roots(h, Rect::around(-gen.omega, 0.05), WronskianKind::Gamma, find_options(cfg)).roots;
    if (near.size() != 1) throw NotFoundError("no unique source mode of the reversed partner at -Ω");
    const auto source = eigenmode(h, Complex{0.0, near.front().omega.imag()}, WronskianKind::Gamma, gen.phi.grid);
    const auto sb = susy_block_basis(gen, h, source, policy);
    const auto n = block_norm(sb, h, gen, source);
    const auto ra = reverse_annihilation(gen, sb, h, source);
    const double e = std::abs(n.expected);
    checks["eq53_residual"] = std::max(b.chain_residual, sb.chain_residual);
    checks["norm_ratio_error"] =
        std::max(std::abs(n.via_bilinear - n.expected), std::abs(n.via_wronskian - n.expected)) / e;
    checks["annihilation_residual"] = ra.annihilation0;
    checks["reverse_coefficient_error"] = ra.c_error;
    j["susy"] = {{"generator", generator_json(gen)},
                 {"source", cj(source.omega)},
                 {"norm_ratio", {{"via_bilinear", cj(n.via_bilinear)},
                                 {"via_wronskian", cj(n.via_wronskian)},
                                 {"expected", cj(n.expected)}}}};
  }
  j["checks"] = checks;
  return j;
}

RunResult task_jordan(const RunConfig& cfg) {
  const auto rep = spectrum(cfg, cfg.potential, cfg.region, WronskianKind::Gamma);
  const auto blocks = detect_blocks(rep);
  if (blocks.empty()) throw NotFoundError("no multiple zero of the Γ Wronskian in the region");
  ordered_json out = ordered_json::array();
  for (const auto& c : blocks) out.push_back(jordan_block(cfg, c));
  RunResult res;
  res.files["jordan.json"] = dump(ordered_json{{"region", rect_json(cfg.region)}, {"blocks", out}});
  return res;
}

Potential scaled(const Potential& v, double s) {
  if (v.is_piecewise_constant()) {
    auto segs = v.segments();
    for (auto& g : segs) g.value *= s;
    return Potential::piecewise_constant(std::move(segs));
  }
  auto pieces = v.pieces();
  for (auto& p : pieces) {
    for (auto& x : p.values) x *= s;
  }
  return Potential::sampled(std::move(pieces));
}

RunResult task_sweep(const RunConfig& cfg) {
  const auto& s = *cfg.sweep;
  const auto family = [&](double p) { return scaled(cfg.potential, p); };
  std::vector<double> params;
  for (int i = 0; i < s.points; ++i) params.push_back(s.lo + (s.hi - s.lo) * i / (s.points - 1));
  const auto scans = parallel_map(params, [&](double p) {
    return imaginary_axis_scan(family(p), WronskianKind::Gamma, s.gamma_lo, s.gamma_hi, 400);
  });
  std::string csv = "parameter,index,re,im\n";
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < scans[i].size(); ++k) {
      csv += num(params[i]) + "," + std::to_string(k) + ",0," + num(-scans[i][k].gamma) + "\n";
    }
  }
  const auto c = find_coalescence(family, s.lo, s.hi, WronskianKind::Gamma, s.gamma_lo, s.gamma_hi);
  RunResult res;
  res.files["sweep_trajectory.csv"] = csv;
  res.files["sweep.json"] = dump(ordered_json{{"family", "scale"},
                                              {"range", {s.lo, s.hi}},
                                              {"gamma", {s.gamma_lo, s.gamma_hi}},
                                              {"parameter", c.parameter},
                                              {"omega", cj(c.omega)},
                                              {"multiplicity", c.multiplicity},
                                              {"dJ_abs", c.dJ_abs},
                                              {"dJ_scale", c.dJ_scale},
                                              {"trajectory_file", "sweep_trajectory.csv"}});
  return res;
}

struct Row {
  Root root;
  std::string cls;
  std::string system;
};

/// Rows for the roots of one Wronskian kind on both systems; roots present in
/// both with equal multiplicity are listed once as "both".
void membership(const std::vector<Root>& on_v, const std::vector<Root>& on_vt, const std::string& cls_override,
                std::vector<Row>& rows) {
  std::vector<bool> used(on_vt.size(), false);
  auto cls = [&](const Root& r) { return cls_override.empty() ? std::string(to_string(r.classification)) : cls_override; };
  for (const auto& r : on_v) {
    std::string sys = "V";
    for (std::size_t k = 0; k < on_vt.size(); ++k) {
      if (!used[k] && on_vt[k].multiplicity == r.multiplicity &&
          std::abs(on_vt[k].omega - r.omega) <= 1e-5 * (1.0 + std::abs(r.omega))) {
        used[k] = true;
        sys = "both";
        break;
      }
    }
    rows.push_back({r, cls(r), sys});
  }
  for (std::size_t k = 0; k < on_vt.size(); ++k) {
    if (!used[k]) rows.push_back({on_vt[k], cls(on_vt[k]), "Vt"});
  }
}

RunResult task_emit_figure(const RunConfig& cfg) {
  const auto gen = select_generator(cfg);
  const auto& v = cfg.potential;
  const auto vt = partner_potential(gen, v);

  std::string pot = "x,V,V_tilde\n";
  for (const double x : gen.phi.grid.x()) pot += num(x) + "," + num(v(x)) + "," + num(vt(x)) + "\n";

  std::vector<Row> rows;
  const auto both = parallel_map(std::vector<const Potential*>{&v, &vt},
                                 [&](const Potential* p) { return spectrum(cfg, *p, cfg.region, WronskianKind::Gamma); });
  membership(merge_close(both[0].roots), merge_close(both[1].roots), "", rows);
  if (gen.phi.kind != WronskianKind::Gamma) {
    const Rect box = Rect::around(gen.omega, 0.1);
    for (const auto k : {WronskianKind::TTM_L, WronskianKind::TTM_R}) {
      membership(merge_close(spectrum(cfg, v, box, k).roots), merge_close(spectrum(cfg, vt, box, k).roots),
                 to_string(k), rows);
    }
  }
  std::string spec = "re,im,class,system,multiplicity\n";
  for (const auto& r : rows) {
    spec += num(r.root.omega.real()) + "," + num(r.root.omega.imag()) + "," + r.cls + "," + r.system + "," +
            std::to_string(r.root.multiplicity) + "\n";
  }
  RunResult res;
  res.files["figure_potential.csv"] = pot;
  res.files["figure_spectrum.csv"] = spec;
  return res;
}

}  // namespace

const char* to_string(Task t) {
  for (const auto& [k, name] : task_table()) {
    if (k == t) return name.c_str();
  }
  return "?";
}

Task task_from_string(const std::string& s) {
  for (const auto& [k, name] : task_table()) {
    if (name == s) return k;
  }
  fail("unknown task '" + s + "'");
}

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, name] : task_table()) n.push_back(name);
    return n;
  }();
  return names;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, Task task,
                       const Overrides& ov) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config parse error at line " << e.source().begin.line << ": " << e.description();
    fail(os.str());
  }
  allow_keys(root, "config",
             {"task", "grid", "threads", "output", "potential", "region", "tolerances", "spectrum", "generator",
              "sweep", "jordan"});
  RunConfig cfg;
  cfg.task = task;
  if (auto t = opt_string(root, "task", "config"); t && task_from_string(*t) != task) {
    fail("config is for task '" + *t + "' but '" + to_string(task) + "' was requested");
  }

  const toml::table* pot = sub_table(root, "potential");
  if (pot == nullptr) fail("[potential] is required");
  cfg.potential = parse_potential(*pot, base_dir);

  if (const toml::table* r = sub_table(root, "region")) {
    allow_keys(*r, "[region]", {"re", "im"});
    const auto [rl, rh] = interval(*r, "re", "region");
    const auto [il, ih] = interval(*r, "im", "region");
    cfg.region = {rl, rh, il, ih};
  }
  if (!cfg.region.well_formed()) fail("region must satisfy lo < hi on both axes");

  long long grid = static_cast<long long>(kDefaultGridPoints);
  if (auto g = opt_integer(root, "grid", "config")) grid = *g;
  if (ov.grid) grid = *ov.grid;
  check_grid(grid);
  cfg.grid = static_cast<std::size_t>(grid);

  if (auto t = opt_integer(root, "threads", "config")) {
    if (*t < 1) fail("threads must be positive");
    cfg.threads = static_cast<int>(*t);
  }
  if (auto o = opt_string(root, "output", "config")) cfg.output = *o;
  if (ov.out) cfg.output = *ov.out;

  if (const toml::table* t = sub_table(root, "tolerances")) {
    allow_keys(*t, "[tolerances]", {"tol_root", "tol_axis"});
    if (auto x = opt_number(*t, "tol_root", "tolerances")) cfg.tol_root = *x;
    if (auto x = opt_number(*t, "tol_axis", "tolerances")) cfg.tol_axis = *x;
  }
  if (ov.tol_root) cfg.tol_root = *ov.tol_root;
  if (!(cfg.tol_root > 0.0 && cfg.tol_root < 1e-2)) fail("tol_root must lie in (0, 1e-2)");
  if (!(cfg.tol_axis > 0.0 && cfg.tol_axis < 1e-2)) fail("tol_axis must lie in (0, 1e-2)");

  if (const toml::table* s = sub_table(root, "spectrum")) {
    allow_keys(*s, "[spectrum]", {"kinds"});
    if (const toml::node* k = s->get("kinds")) {
      const toml::array* a = k->as_array();
      if (a == nullptr || a->empty()) fail("spectrum.kinds must be a non-empty array");
      cfg.kinds.clear();
      for (const auto& e : *a) {
        if (!e.is_string()) fail("spectrum.kinds entries must be strings");
        try {
          const auto kind = wronskian_kind_from_string(*e.value<std::string>());
          if (std::find(cfg.kinds.begin(), cfg.kinds.end(), kind) != cfg.kinds.end()) {
            fail("spectrum.kinds lists " + *e.value<std::string>() + " twice");
          }
          cfg.kinds.push_back(kind);
        } catch (const InvalidInput& err) {
          fail(std::string("spectrum.kinds: ") + err.what());
        }
      }
    }
  }

  if (const toml::table* g = sub_table(root, "generator")) {
    allow_keys(*g, "[generator]", {"kind", "omega_im"});
    GeneratorChoice c;
    if (auto k = opt_string(*g, "kind", "generator")) {
      try {
        c.kind = wronskian_kind_from_string(*k);
      } catch (const InvalidInput& err) {
        fail(std::string("generator.kind: ") + err.what());
      }
    }
    const auto w = opt_number(*g, "omega_im", "generator");
    if (!w) fail("generator.omega_im is required");
    if (*w == 0.0) fail("generator.omega_im must be nonzero");
    c.omega_im = *w;
    cfg.generator = c;
  }
  if ((task == Task::Partner || task == Task::Verify || task == Task::EmitFigure) && !cfg.generator) {
    fail(std::string("task '") + to_string(task) + "' needs a [generator] table");
  }

  if (const toml::table* s = sub_table(root, "sweep")) {
    allow_keys(*s, "[sweep]", {"family", "range", "gamma", "points"});
    if (auto f = opt_string(*s, "family", "sweep"); f && *f != "scale") fail("sweep.family must be \"scale\"");
    SweepConfig sc;
    std::tie(sc.lo, sc.hi) = interval(*s, "range", "sweep");
    if (s->get("gamma") != nullptr) std::tie(sc.gamma_lo, sc.gamma_hi) = interval(*s, "gamma", "sweep");
    if (!(sc.gamma_lo > 0.0)) fail("sweep.gamma must be positive");
    if (auto p = opt_integer(*s, "points", "sweep")) {
      if (*p < 2 || *p > 10000) fail("sweep.points must lie in [2, 10000]");
      sc.points = static_cast<int>(*p);
    }
    cfg.sweep = sc;
  }
  if (task == Task::Sweep && !cfg.sweep) fail("task 'sweep' needs a [sweep] table");

  if (const toml::table* j = sub_table(root, "jordan")) {
    allow_keys(*j, "[jordan]", {"alpha"});
    if (auto a = opt_string(*j, "alpha", "jordan")) {
      if (*a == "plain") {
        cfg.plain_alpha = true;
      } else if (*a != "smaller_root") {
        fail("jordan.alpha must be \"smaller_root\" or \"plain\"");
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, Task task, const Overrides& ov) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path.parent_path(), task, ov);
}

RunResult run(const RunConfig& cfg) {
  switch (cfg.task) {
    case Task::Spectrum: return task_spectrum(cfg);
    case Task::Generators: return task_generators(cfg);
    case Task::Partner: return task_partner(cfg);
    case Task::Verify: return task_verify(cfg);
    case Task::Jordan: return task_jordan(cfg);
    case Task::Sweep: return task_sweep(cfg);
    case Task::EmitFigure: return task_emit_figure(cfg);
  }
  throw InvalidInput("unknown task");
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& files) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : files) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  }
}

}  // namespace qnmsusy::cli
