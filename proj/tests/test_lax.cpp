#include <doctest.h>

#include <cmath>
#include <random>

#include "bethe/error.hpp"
#include "bethe/lax.hpp"
#include "bethe/monodromy.hpp"

using namespace bethe;

namespace {

ModelParams params(int sites, double spacing, double c, int nmax) {
  ModelParams p;
  p.sites = sites;
  p.spacing = spacing;
  p.coupling = c;
  p.max_particles = nmax;
  return p;
}

cplx draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  const double x = d(rng);
  const double y = d(rng);
  return {x, 0.1 * y};
}

}  // namespace

TEST_CASE("R-matrix entries") {
  const Matrix9 r = build_R(2.0, 0.0, 1.0);
  // g(2,0) = -0.5i: diagonal (1,1) entry of I + gP is 1 + g
  CHECK(std::abs(r(aux_pair(1, 1), aux_pair(1, 1)) - cplx(1.0, -0.5)) < 1e-15);
  CHECK(std::abs(r(aux_pair(1, 2), aux_pair(2, 1)) - cplx(0.0, -0.5)) < 1e-15);
  CHECK(std::abs(r(aux_pair(1, 2), aux_pair(1, 2)) - cplx(1.0)) < 1e-15);
  CHECK((permutation9() * permutation9() - Matrix9::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("R is singular at u - v = -ic") {
  const double c = 1.3;
  const cplx v(0.4, 0.2);
  const Matrix9 r = build_R(v - cplx(0.0, c), v, c);
  CHECK(std::abs(r.determinant()) < 1e-12);
  CHECK(std::abs(build_R(v + 1.0, v, c).determinant()) > 1e-3);
}

TEST_CASE("unitarity R(u,v) R(v,u) = f(u,v) f(v,u)") {
  const double c = 0.8;
  const cplx u(1.1, 0.3), v(-0.7, 0.05);
  const cplx g = cplx(0.0, -c) / (u - v);
  const Matrix9 prod = build_R(u, v, c) * build_R(v, u, c);
  CHECK((prod - (1.0 + g) * (1.0 - g) * Matrix9::Identity()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Yang-Baxter equation") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 5; ++k) {
    const cplx u = draw(rng), v = draw(rng), w = draw(rng);
    CHECK(yang_baxter_residual(u, v, w, 1.0) < 1e-12);
  }
}

TEST_CASE("pole guards") {
  CHECK_THROWS_AS(build_R(0.3, 0.3 + 1e-15, 1.0), Error);
  const FockSpace s(params(1, 0.5, 1.0, 2));
  try {
    build_L(s, cplx(0.0, -4.0), 1);
    FAIL("expected a pole error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::pole);
  }
  const MonodromyBuilder lax = [&](cplx u) { return build_L(s, u, 1); };
  CHECK_THROWS_AS(rtt_residual(s, 0.5, 0.5 + 1e-15, lax), Error);
}

TEST_CASE("r0") {
  CHECK(std::abs(r0(0.0, 0.5) - cplx(1.0)) < 1e-15);
  const cplx r = r0(1.0, 0.2);
  CHECK(std::abs(r - cplx(0.980198019801980, 0.198019801980198)) < 1e-12);
  CHECK(std::abs(std::abs(r0(2.7, 0.3)) - 1.0) < 1e-15);
}

TEST_CASE("vacuum action of L is upper triangular with diagonal (1, 1, r0)") {
  const FockSpace s(params(2, 0.5, 1.0, 3));
  const State vac = s.vacuum();
  for (cplx u : {cplx(0.3), cplx(-1.7, 0.2), cplx(2.5, -0.1)})
    for (int n = 1; n <= 2; ++n) {
      const AuxMatrix3 l = build_L(s, u, n);
      const cplx diag[3] = {1.0, 1.0, r0(u, 0.5)};
      for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= i; ++j) {
          const State target = i == j ? State(diag[i - 1] * vac) : State(State::Zero(vac.size()));
          CHECK((l(i, j) * vac - target).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("L is linear over 1 - iu Delta/2") {
  const FockSpace s(params(1, 0.4, 1.2, 3));
  const LaxCoefficients co = lax_coefficients(s, 1);
  const cplx u(0.9, -0.2);
  const AuxMatrix3 l = build_L(s, u, 1);
  const cplx den = 1.0 - cplx(0.0, 0.2) * u;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      const Operator expect = (co.constant(i, j) + u * co.linear(i, j)) / den;
      CHECK(Eigen::MatrixXcd(expect - l(i, j)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("RTT for the single-site L") {
  const FockSpace s(params(1, 0.4, 1.0, 4));
  const MonodromyBuilder lax = [&](cplx u) { return build_L(s, u, 1); };
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const cplx u = draw(rng), v = draw(rng);
    CHECK(rtt_residual(s, u, v, lax) < 1e-10);
  }
}

TEST_CASE("RTT detects a broken L") {
  const FockSpace s(params(1, 0.4, 1.0, 4));
  const MonodromyBuilder broken = [&](cplx u) {
    AuxMatrix3 l = build_L(s, u, 1);
    l(1, 2) = 1.1 * l(1, 2);
    return l;
  };
  CHECK(rtt_residual(s, 0.7, -0.3, broken) > 1e-3);
}
