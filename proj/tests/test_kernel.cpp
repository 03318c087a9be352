#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bethe/error.hpp"
#include "bethe/kernel.hpp"
#include "bethe/lax.hpp"

using namespace bethe;

namespace {

ModelParams default_params() { return ModelParams{}; }

}  // namespace

TEST_CASE("kernel functions") {
  const double c = 1.0;
  CHECK(std::abs(g_fn(2.0, 0.0, c) - cplx(0.0, -0.5)) < 1e-15);
  CHECK(std::abs(f_fn(2.0, 0.0, c) - cplx(1.0, -0.5)) < 1e-15);
  CHECK(std::abs(h_fn(2.0, 0.0, c) - f_fn(2.0, 0.0, c) / g_fn(2.0, 0.0, c)) < 1e-15);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 5; ++k) {
    const cplx x(nd(rng), nd(rng)), y(nd(rng), nd(rng));
    CHECK(std::abs(g_fn(x, y, 0.7) + g_fn(y, x, 0.7)) < 1e-14);
  }
  CHECK(std::abs(r3_fn(0.0, default_params()) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(r3_fn(1.1, default_params()) - std::pow(r0(1.1, 0.5), 3)) < 1e-14);
  CHECK(std::abs(ell3_fn(0.4, 0.5, 2) - std::pow(r0(0.4, 0.5), 2)) < 1e-14);
  CHECK(std::abs(f_prod({}, {1.0}, c) - cplx(1.0)) == 0.0);
  CHECK_THROWS_AS(g_fn(0.5, 0.5, c), Error);
}

TEST_CASE("Izergin determinant") {
  CHECK(izergin({}, {}, 1.0) == cplx(1.0));
  CHECK(std::abs(izergin({2.0}, {0.0}, 1.0) - cplx(0.0, -0.5)) < 1e-15);
  const Roots x{cplx(0.3, 0.1), cplx(-1.2, 0.4)}, y{cplx(0.9, -0.2), cplx(2.1, 0.05)};
  CHECK(std::abs(izergin(x, y, 1.0) - izergin({x[1], x[0]}, y, 1.0)) < 1e-12);
  CHECK(std::abs(izergin(x, y, 1.0) - izergin(x, {y[1], y[0]}, 1.0)) < 1e-12);
  // residue recursion at x2 -> y2: K2 ~ g(x2,y2) f(y2,y1) f(x1,y2) K1(x1|y1)
  for (double eps : {1e-5, 1e-7}) {
    const Roots xx{x[0], y[1] + eps};
    const cplx lhs = izergin(xx, y, 1.0) / g_fn(xx[1], y[1], 1.0);
    const cplx rhs = f_fn(y[1], y[0], 1.0) * f_fn(x[0], y[1], 1.0) * izergin({x[0]}, {y[0]}, 1.0);
    CHECK(std::abs(lhs - rhs) < 10.0 * eps * std::abs(rhs));
  }
  CHECK_THROWS_AS(izergin({1.0}, {}, 1.0), Error);
}

TEST_CASE("closed-form (0,1) roots") {
  const ModelParams p = default_params();
  Roots closed = closed_form_01(p);
  REQUIRE(closed.size() == 3);
  std::sort(closed.begin(), closed.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  CHECK(std::abs(closed[0] + 4.0 * std::sqrt(3.0)) < 1e-12);
  CHECK(std::abs(closed[1]) < 1e-12);
  CHECK(std::abs(closed[2] - 4.0 * std::sqrt(3.0)) < 1e-12);
  for (const auto& v : closed) {
    CHECK(bethe_residual(BetheRoots{{}, {v}, {}}, p).norm() < 1e-12);
    // independent check: r3(v) = 1
    CHECK(std::abs(r3_fn(v, p) - 1.0) < 1e-12);
  }
  CHECK(bethe_residual(BetheRoots{{}, {closed[2] + 1e-3}, {}}, p).norm() > 1e-6);
  CHECK(bethe_residual(BetheRoots{}, p).size() == 0);
}

TEST_CASE("Newton solver") {
  const ModelParams p = default_params();
  const BetheRoots r = solve_bethe(BetheRoots{{}, {5.0}, {}}, p);
  CHECK(std::abs(r.v[0] - 4.0 * std::sqrt(3.0)) < 1e-10);
  CHECK(r.residual < 1e-10);

  // continuity in the twist
  BetheRoots tw = r;
  tw.twist.beta[0] = 1e-6;
  const BetheRoots r2 = solve_bethe(tw, p);
  CHECK(std::abs(r2.v[0] - r.v[0]) < 1e-5);

  // a twisted (1,1) sector from a coarse grid seed
  const Twist probe{{cplx(0.3), cplx(-0.1), cplx(0.2)}};
  const auto sols = find_solutions(1, 1, p, 3, probe);
  REQUIRE(!sols.empty());
  for (const auto& s : sols) CHECK(bethe_residual(s, p).norm() < 1e-10);

  // the untwisted (1,1) sector has no finite solution
  CHECK(find_solutions(1, 1, p, 3).empty());

  CHECK_THROWS_AS(solve_bethe(BetheRoots{{}, {1.0, 1.0}, {}}, p), Error);
}

TEST_CASE("twisted (1,1) closed form") {
  const ModelParams p = default_params();
  const Twist tw{{cplx(0.3), cplx(-0.1), cplx(0.2)}};
  const cplx i1(0.0, 1.0);
  const cplx v = (2.0 / p.spacing) * std::tan((tw.beta[0] - tw.beta[2]) / (2.0 * i1 * 3.0));
  const cplx u = v + i1 / (std::exp(tw.beta[0] - tw.beta[1]) - 1.0);
  CHECK(bethe_residual(BetheRoots{{u}, {v}, tw}, p).norm() < 1e-12);
}

TEST_CASE("solutions of two-root sectors") {
  const ModelParams p = default_params();
  const auto s02 = find_solutions(0, 2, p, 6);
  CHECK(s02.size() == 6);
  for (std::size_t a = 0; a < s02.size(); ++a) {
    CHECK(s02[a].residual < 1e-10);
    for (std::size_t b = a + 1; b < s02.size(); ++b) CHECK_FALSE(same_roots(s02[a], s02[b]));
  }
  const auto s12 = find_solutions(1, 2, p, 3);
  CHECK(s12.size() == 3);
  for (const auto& s : s12) {
    CHECK(s.residual < 1e-10);
    // no spurious cleared-polynomial solutions: u != v and v != u + ic
    for (const auto& v : s.v) {
      CHECK(std::abs(v - s.u[0]) > 1e-6);
      CHECK(std::abs(v - s.u[0] - cplx(0.0, 1.0)) > 1e-6);
    }
  }
}

TEST_CASE("eigenvalue tau") {
  const ModelParams p = default_params();
  const cplx w(0.4, 0.3);
  CHECK(std::abs(eigenvalue_tau(w, BetheRoots{}, p) - (2.0 + std::pow(r0(w, 0.5), 3))) < 1e-14);
  BetheRoots r{{}, {0.0}, {}};
  BetheRoots zero_twist = r;
  zero_twist.twist = Twist::along(2, 0.0);
  CHECK(eigenvalue_tau(w, r, p) == eigenvalue_tau(w, zero_twist, p));
}

TEST_CASE("root derivatives in the twist") {
  const ModelParams p = default_params();
  const BetheRoots r01 = solve_bethe(BetheRoots{{}, {5.0}, {}}, p);
  const Eigen::MatrixXcd imp = root_twist_derivative(r01, p);
  const Eigen::MatrixXcd fd = root_twist_derivative_fd(r01, p, 1e-5);
  CHECK((imp - fd).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, imp.cwiseAbs().maxCoeff()));
  // a = 0: only beta_2 - beta_3 enters
  CHECK(std::abs(imp(0, 1) + imp(0, 2)) < 1e-12);
  CHECK(std::abs(imp(0, 0)) < 1e-14);

  for (const auto& r : find_solutions(1, 2, p, 3)) {
    const Eigen::MatrixXcd a = root_twist_derivative(r, p);
    const Eigen::MatrixXcd b = root_twist_derivative_fd(r, p, 1e-5);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  }
}
