#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qnmsusy/errors.hpp"
#include "qnmsusy/jordan.hpp"

using namespace qnmsusy;

namespace {

// H has an NM Φ at Ω = i and a QNM Ψ at -Ω; its partner under Φ is the
// barrier at the coalescence height, with a double zero at -i.
struct Doubling {
  double v_star = 0.0;
  Potential barrier = square_barrier(0.16);
  Generator forward;  // zero mode of the barrier at -i
  Potential h = square_barrier(0.16);
  Generator gen;  // Φ = 1 / forward, χ = +1
  ModeFunction source;

  Doubling() {
    const auto c = find_coalescence([](double v0) { return square_barrier(v0); }, 0.16, 0.8, WronskianKind::Gamma,
                                    0.01, 5.0);
    v_star = c.parameter;
    barrier = square_barrier(v_star);
    forward = build_generator(eigenmode(barrier, Complex{0.0, c.omega.imag()}));
    h = partner_potential(forward, barrier);
    gen = reverse_generator(forward);
    const auto roots = find_roots(h, Rect::around(-gen.omega, 0.05), WronskianKind::Gamma).roots;
    REQUIRE(roots.size() == 1);
    source = eigenmode(h, Complex{0.0, roots.front().omega.imag()}, WronskianKind::Gamma, gen.phi.grid);
  }
};

const Doubling& doubling() {
  static const Doubling d;
  return d;
}

}  // namespace

TEST_CASE("detect_blocks") {
  SUBCASE("two simple zero modes give no block") {
    const auto r = find_roots(square_barrier(0.16), Rect{-1.0, 1.0, -3.0, 0.5}, WronskianKind::Gamma);
    CHECK(detect_blocks(r).empty());
  }
  SUBCASE("coalesced barrier") {
    const auto& d = doubling();
    CHECK(d.v_star == doctest::Approx(oracle::coalescence_height()).epsilon(1e-6));
    const auto r = find_roots(d.barrier, Rect{-1.0, 1.0, -3.0, 0.5}, WronskianKind::Gamma);
    const auto blocks = detect_blocks(r);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks.front().order == 2);
    CHECK(std::abs(blocks.front().omega - Complex{0.0, -1.0}) < 1e-4);
  }
  SUBCASE("doubled TTM_R of the multi-step partner") {
    const auto v = multi_step_barrier();
    const auto cands = candidate_generators(v, kDefaultRegion);
    const Generator* tl = nullptr;
    for (const auto& g : cands.eligible) {
      if (g.phi.kind == WronskianKind::TTM_L) tl = &g;
    }
    REQUIRE(tl != nullptr);
    const auto vt = partner_potential(*tl, v);
    const Rect box{-0.4, 0.4, -1.4, -0.6};
    const auto blocks = detect_blocks(find_roots(vt, box, WronskianKind::TTM_R));
    REQUIRE(blocks.size() == 1);
    CHECK(blocks.front().order == 2);
    CHECK(std::abs(blocks.front().omega - Complex{0.0, -0.990}) < 1e-2);
    CHECK(detect_blocks(find_roots(v, box, WronskianKind::TTM_R)).empty());

    // Away from ±iK a further transform keeps the block.
    const auto more = candidate_generators(vt, kDefaultRegion);
    const Generator* far = nullptr;
    for (const auto& g : more.eligible) {
      if (g.phi.kind == WronskianKind::Gamma && std::abs(g.K - tl->K) > 0.2) far = &g;
    }
    REQUIRE(far != nullptr);
    const auto v2 = partner_potential(*far, vt);
    const auto again = detect_blocks(find_roots(v2, box, WronskianKind::TTM_R));
    REQUIRE(again.size() == 1);
    CHECK(again.front().order == 2);
    CHECK(std::abs(again.front().omega - blocks.front().omega) < 1e-6);
  }
  SUBCASE("near-coincident simple roots are paired") {
    SpectrumReport r;
    r.roots.push_back({Complex{0.0, -1.0}, 1});
    r.roots.push_back({Complex{0.0, -1.00001}, 1});
    r.roots.push_back({Complex{2.0, -1.0}, 1});
    const auto blocks = detect_blocks(r);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks.front().merged_pair);
    CHECK(std::abs(blocks.front().omega - Complex{0.0, -1.000005}) < 1e-12);
  }
}

TEST_CASE("ledger with a doubled zero") {
  const auto& d = doubling();
  const auto l = spectral_ledger(d.forward, d.barrier, d.h);
  CHECK(l.n_minus == 2);
  CHECK(l.nt_minus == 1);
  CHECK(l.n_plus == 0);
  CHECK(l.nt_plus == 1);
}

TEST_CASE("block basis at the doubled frequency") {
  const auto& d = doubling();
  const auto b = susy_block_basis(d.gen, d.h, d.source);
  const double scale = std::abs(b.block_norm);
  CHECK(std::abs(b.norm00) <= 1e-8 * scale);
  CHECK(std::abs(b.norm11) <= 1e-8 * scale);
  CHECK(b.chain_residual <= 1e-6);
  CHECK(b.outgoing_residual <= 1e-8);
  CHECK(std::abs(b.alpha) < std::abs(b.alpha_roots[1]));
  for (const double t : {0.0, 0.5, 2.0}) CHECK(time_domain_residual(b, partner_potential(d.gen, d.h), t) <= 1e-8);

  SUBCASE("plain policy changes Ψ₁ but not the block norm") {
    const auto p = susy_block_basis(d.gen, d.h, d.source, AlphaPolicy::Plain);
    CHECK(p.alpha == Complex{});
    CHECK(std::abs(p.block_norm - b.block_norm) <= 1e-8 * scale);
    CHECK(std::abs(p.norm11) > 1e-3 * scale);
  }
  SUBCASE("Ψ₀ is the map of the source") {
    const auto mapped = map_state(d.gen, d.source).mode;
    double worst = 0.0;
    double size = 0.0;
    for (std::size_t i = 0; i < mapped.phi.size(); ++i) {
      worst = std::max(worst, std::abs(mapped.phi[i] - b.psi0.phi[i]));
      size = std::max(size, std::abs(mapped.phi[i]));
    }
    CHECK(worst <= 1e-6 * size);
  }
}

TEST_CASE("block norm by two routes") {
  const auto& d = doubling();
  const auto b = susy_block_basis(d.gen, d.h, d.source);
  const auto n = block_norm(b, d.h, d.gen, d.source);
  CHECK(n.route_difference <= 1e-6);
  CHECK(std::abs(n.via_bilinear - n.expected) <= 1e-6 * std::abs(n.expected));
  CHECK(std::abs(n.via_wronskian - n.expected) <= 1e-6 * std::abs(n.expected));
  CHECK(std::abs(n.expected - Complex{0.0, -2.0}) < 1e-12);
}

TEST_CASE("reverse transform of the block") {
  const auto& d = doubling();
  const auto b = susy_block_basis(d.gen, d.h, d.source);
  const auto r = reverse_annihilation(d.gen, b, d.h, d.source);
  CHECK(r.annihilated);
  CHECK(r.annihilation0 <= 1e-8);
  CHECK(r.c_matches);
  CHECK(r.c_error <= 1e-6);
  CHECK(r.fit_residual <= 1e-6);
  CHECK(r.eigen_residual <= 1e-6);
  CHECK(r.preimage_not_outgoing);
  CHECK(r.incoming_admixture > 1e-3);
}

TEST_CASE("proportionality constant at coalescence") {
  const auto& d = doubling();
  const auto p = proportionality_constant(d.gen, d.source);
  CHECK(p.agreement <= 1e-6);
  CHECK(p.surface <= 1e-6);
  CHECK(p.constancy <= 1e-6);
  CHECK(std::abs(p.direct - p.via_left) <= 1e-6 * std::abs(p.via_left));
}

TEST_CASE("away from coalescence the two partner modes stay distinct") {
  const auto v = square_barrier(0.40);
  const auto cands = candidate_generators(v, Rect{-1.0, 1.0, -5.0, 0.5});
  REQUIRE(cands.eligible.size() == 2);
  const auto& fwd = cands.eligible[1];  // the zero mode nearer the axis
  const auto h = partner_potential(fwd, v);
  const auto gen = reverse_generator(fwd);
  const auto other = cands.eligible[0].omega;
  const auto src = eigenmode(h, other, WronskianKind::Gamma, gen.phi.grid);
  const auto p = proportionality_constant(gen, src);
  CHECK(p.constancy > 1e-2);
  CHECK_THROWS_AS((void)susy_block_basis(gen, h, src), InvalidInput);
}

TEST_CASE("a simple zero is not a block") {
  const auto v = square_barrier(0.16);
  const double g = oracle::even_zero_mode(0.16, 1.0, 0.05, 0.5);
  CHECK_THROWS_AS((void)build_block_basis(v, Complex{0.0, -g}), InvalidInput);
}
