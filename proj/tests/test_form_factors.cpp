#include <doctest.h>

#include <cmath>

#include "bethe/error.hpp"
#include "bethe/form_factors.hpp"

using namespace bethe;

namespace {

struct Fixture {
  ModelParams p;
  FockSpace space{p};
  Monodromy t{space};
  std::vector<cplx> zs = default_z_samples();

  OnShellState state(int a, int b, int k) {
    const auto sols = find_solutions(a, b, p, k + 1);
    REQUIRE(static_cast<int>(sols.size()) > k);
    return make_state(t, sols[static_cast<std::size_t>(k)]);
  }
};

}  // namespace

TEST_CASE("momentum and ell-ratio") {
  const BetheRoots ket{{}, {1.0, 2.0}, {}}, bra{{}, {3.0}, {}};
  CHECK(std::abs(momentum(ket, bra)) < 1e-15);
  CHECK(std::abs(ell_ratio(ket, ket, 0.5, 2) - cplx(1.0)) < 1e-15);
  const BetheRoots k1{{}, {0.4}, {}}, b1{{}, {-0.9}, {}};
  CHECK(std::abs(ell_ratio(k1, b1, 0.5, 2) - ell3_fn(0.4, 0.5, 2) / ell3_fn(-0.9, 0.5, 2)) < 1e-14);
}

TEST_CASE("universal form factor is independent of z") {
  Fixture f;
  const OnShellState c = f.state(0, 1, 0), b = f.state(0, 1, 1);
  const FormFactorRecord rec = global_ff(f.t, c, b, 3, 3, f.zs);
  CHECK(rec.spread < 1e-8);
  CHECK(std::abs(rec.universal) > 1e-8);
  // direct matrix element oracle at one z
  const cplx z = f.zs[2];
  const cplx direct = bilinear(c.cv.costate, f.t.apply(3, 3, z, b.bv.state));
  const cplx dt = eigenvalue_tau(z, c.roots, f.p) - eigenvalue_tau(z, b.roots, f.p);
  CHECK(std::abs(direct / dt - rec.universal) < 1e-8 * std::abs(rec.universal));
  CHECK_THROWS_AS(global_ff(f.t, c, c, 3, 3, f.zs), Error);
}

TEST_CASE("particle-number grading") {
  Fixture f;
  const OnShellState a = f.state(0, 1, 0), b = f.state(0, 2, 0);
  // T12 between b = 1 and b = 2 states conserves b, so the element vanishes
  CHECK(std::abs(global_ff(f.t, b, a, 1, 2, f.zs).value) == 0.0);
  // T23 raises b by one
  CHECK(std::abs(global_ff(f.t, b, a, 2, 3, f.zs).universal) > 1e-8);
}

TEST_CASE("worked zero-mode identity") {
  Fixture f;
  const OnShellState b = f.state(0, 2, 0);
  const OnShellState c = f.state(1, 2, 0);
  CHECK(worked_zero_mode_identity(f.t, cplx(0.0, 1.0), c, b, f.zs) < 1e-9);
}

TEST_CASE("local form factors") {
  Fixture f;
  const OnShellState vac = make_state(f.t, BetheRoots{});
  const ZeroModes loc = local_zero_modes(f.space, 1, cplx(0.0, 1.0));
  CHECK(std::abs(local_ff(loc, 1, vac, vac, 1, 1).value) < 1e-14);
  // m = M reproduces the global zero modes
  const ZeroModes full = local_zero_modes(f.space, 3, cplx(0.0, 1.0));
  const ZeroModes direct = zero_modes(f.t.rational(), 1.0, cplx(0.0, 1.0));
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      CHECK(Eigen::MatrixXcd(Operator(full(i, j) - direct(i, j))).cwiseAbs().maxCoeff() < 1e-12);
  // (1,3) raises a and b; nonzero from (0,1) to (1,2), zero against the grading
  const OnShellState b = f.state(0, 1, 0), c = f.state(1, 2, 0);
  CHECK(std::abs(local_ff(loc, 1, c, b, 1, 3).value) > 1e-8);
  CHECK(std::abs(local_ff(loc, 1, b, c, 1, 3).value) < 1e-14);
}

TEST_CASE("lattice local-operator identity") {
  Fixture f;
  const OnShellState c = f.state(0, 1, 0), b = f.state(0, 1, 1);
  const FormFactorRecord g = global_ff(f.t, c, b, 2, 2, f.zs);
  const ZeroModes loc = local_zero_modes(f.space, 1, cplx(0.0, 1.0));
  CHECK(local_operator_identity(loc, 1, f.p.spacing, c, b, g).value < 1e-8);
  for (const auto& nr : site_identities(f.t, c, b, 2, 2, f.zs)) CHECK(nr.value < 1e-8);
}

TEST_CASE("twisted scalar products") {
  Fixture f;
  const auto sols = find_solutions(0, 2, f.p, 2);
  REQUIRE(sols.size() == 2);
  const cplx n2 = norm_squared(f.t, sols[0]);
  CHECK(std::abs(twisted_scalar_product(f.t, sols[0], sols[0]) - n2) < 1e-12 * std::abs(n2));
  CHECK(std::abs(twisted_scalar_product(f.t, sols[1], sols[0])) < 1e-9 * std::abs(n2));
  double prev = INFINITY;
  for (double tt : {1e-2, 1e-3, 1e-4}) {
    BetheRoots tw = sols[0];
    tw.twist = Twist::along(2, tt);
    tw = solve_bethe(tw, f.p);
    const double dev = std::abs(twisted_scalar_product(f.t, tw, sols[0]) - n2);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev < 1e-3 * std::abs(n2));
}

TEST_CASE("generating functional") {
  Fixture f;
  const auto r = find_solutions(0, 1, f.p, 2);
  const ZeroModes loc = local_zero_modes(f.space, 1, cplx(0.0, 1.0));
  // zero twist: G = ||B||^2
  const GeneratingFunctionalReport zero = generating_functional_check(f.t, loc, 1, r[0], r[0], Twist{});
  CHECK(std::abs(zero.g_lhs - norm_squared(f.t, r[0])) < 1e-12 * std::abs(zero.g_lhs));
  CHECK(zero.g_error < 1e-12);

  const Twist tw{{cplx(0.01), cplx(0.02), cplx(-0.015)}};
  const GeneratingFunctionalReport rep = generating_functional_check(f.t, loc, 1, r[0], r[0], tw);
  CHECK(rep.g_error < 1e-7);
  REQUIRE(rep.diagonal.size() == 3);
  for (const auto& e : rep.diagonal) {
    CAPTURE(e.index);
    CHECK(e.error_implicit < 1e-7);
    CHECK(e.error_fd < 1e-7);
    CHECK(e.fd_vs_implicit < 1e-8);
  }
  // off-diagonal pair
  const GeneratingFunctionalReport off = generating_functional_check(f.t, loc, 1, r[1], r[0], tw);
  CHECK(off.g_error < 1e-7);
  for (const auto& e : off.diagonal) CHECK(e.error_implicit < 1e-7);
}

TEST_CASE("scaled error") {
  CHECK(scaled_error(1.0, 1.0, 1.0) == 0.0);
  CHECK(std::abs(scaled_error(2.0, 1.0, 1.0) - 0.5) < 1e-15);
  CHECK(std::abs(scaled_error(1e-20, 0.0, 1.0) - 1e-20) < 1e-30);
}
