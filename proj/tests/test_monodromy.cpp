#include <doctest.h>

#include <cmath>
#include <random>

#include "bethe/error.hpp"
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

double max_diff(const AuxMatrix3& a, const AuxMatrix3& b) {
  double worst = 0.0;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      worst = std::max(worst, Eigen::MatrixXcd(Operator(a(i, j) - b(i, j))).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("one-site monodromy equals L") {
  const FockSpace s(params(1, 0.5, 1.0, 3));
  const Monodromy t(s);
  const cplx u(0.8, 0.1);
  CHECK(max_diff(t.at(u), build_L(s, u, 1)) < 1e-14);
  CHECK(t.rational().degree() == 1);
  // clearing the denominator reproduces the L coefficients
  const LaxCoefficients co = lax_coefficients(s, 1);
  CHECK(max_diff(t.rational().numerator()[0], co.constant) < 1e-15);
  CHECK(max_diff(t.rational().numerator()[1], co.linear) < 1e-15);
}

TEST_CASE("rational form matches the direct product") {
  const FockSpace s(params(2, 0.5, 1.0, 3));
  const Monodromy t(s);
  CHECK(max_diff(t.at(0.7), t.product_at(0.7)) < 1e-12);
  CHECK(max_diff(t.at(cplx(-1.4, 0.3)), t.product_at(cplx(-1.4, 0.3))) < 1e-12);
  CHECK(std::abs(t.rational().denominator(cplx(0.0, -4.0))) < 1e-15);
}

TEST_CASE("vacuum eigenvalues of the monodromy") {
  const FockSpace s(params(3, 0.4, 1.0, 3));
  const Monodromy t(s);
  const State vac = s.vacuum();
  const cplx u = 1.3;
  CHECK((t.apply(3, 3, u, vac) - std::pow(r0(u, 0.4), 3) * vac).norm() < 1e-12);
  CHECK(std::abs(t.lambda3(u) - std::pow(r0(u, 0.4), 3)) < 1e-14);
  CHECK(t.apply(1, 2, u, vac).norm() < 1e-14);
  CHECK(t.apply(2, 1, u, vac).norm() < 1e-14);
  CHECK((t.apply(1, 1, u, vac) - vac).norm() < 1e-14);
}

TEST_CASE("transfer matrix") {
  const FockSpace s(params(3, 0.5, 1.0, 4));
  const Monodromy t(s);
  const cplx w(0.6, -0.2);
  const AuxMatrix3 tw = t.at(w);
  CHECK(Eigen::MatrixXcd(Operator(transfer(tw) - transfer(tw, Twist{}))).cwiseAbs().maxCoeff() == 0.0);
  const State vac = s.vacuum();
  CHECK((transfer(tw) * vac - (2.0 + std::pow(r0(w, 0.5), 3)) * vac).norm() < 1e-12);
  // commuting family on the safe subspace
  const Operator a = transfer(t.at(0.3)), b = transfer(t.at(cplx(-1.2, 0.4)));
  CHECK(max_abs_on(commutator(a, b), s.safe_indices()) < 1e-10);
  // twisted transfer matrices also commute
  const Twist tws{{cplx(0.2), cplx(-0.3), cplx(0.1)}};
  CHECK(max_abs_on(commutator(transfer(t.at(0.3), tws), transfer(t.at(1.9), tws)), s.safe_indices()) < 1e-10);
}

TEST_CASE("composite split") {
  const FockSpace s(params(3, 0.5, 1.0, 3));
  const Monodromy full(s);
  for (int m = 1; m <= 2; ++m) {
    const auto [t1, t2] = composite_split(s, m);
    CHECK(max_diff(t2.at(0.9) * t1.at(0.9), full.at(0.9)) < 1e-12);
    CHECK((t1.apply(3, 3, 0.9, s.vacuum()) - std::pow(r0(0.9, 0.5), m) * s.vacuum()).norm() < 1e-13);
    const MonodromyBuilder b1 = [&](cplx u) { return t1.at(u); };
    const MonodromyBuilder b2 = [&](cplx u) { return t2.at(u); };
    CHECK(rtt_residual(s, 0.4, -1.1, b1) < 1e-10);
    CHECK(rtt_residual(s, 0.4, -1.1, b2) < 1e-10);
  }
  CHECK_THROWS_AS(composite_split(s, 0), Error);
  CHECK_THROWS_AS(composite_split(s, 3), Error);
}

TEST_CASE("expansion at infinity") {
  const FockSpace s(params(2, 0.5, 1.0, 3));
  const Monodromy t(s);
  const int order = 3;
  const auto coeffs = t.rational().expansion_at_infinity(order);
  CHECK(max_diff(coeffs[0], t.at(cplx(1e9, 0.0))) < 1e-6);
  // the truncated series in 1/u misses terms of order u^-(order+1)
  auto truncation_error = [&](double radius) {
    const cplx u(radius, 0.075 * radius);
    AuxMatrix3 series = AuxMatrix3::zero(static_cast<Eigen::Index>(s.dim()));
    for (int k = order; k >= 0; --k) series = coeffs[static_cast<std::size_t>(k)] + (1.0 / u) * series;
    return max_diff(series, t.at(u));
  };
  const double e1 = truncation_error(400.0), e2 = truncation_error(800.0);
  CHECK(e2 < 1e-7);
  CHECK(std::log2(e1 / e2) == doctest::Approx(order + 1).epsilon(0.05));
}

TEST_CASE("zero modes") {
  for (int sites : {3, 4}) {
    const FockSpace s(params(sites, 0.5, 1.0, 4));
    const Monodromy t(s);
    const NormalizationFit fit = measure_zero_mode_normalization(s.params());
    CHECK(std::abs(fit.kappa - cplx(0.0, 1.0)) < 1e-10);
    CHECK(fit.residual < 1e-10);
    const ZeroModes z = zero_modes(t.rational(), 1.0, fit.kappa);
    CHECK(z.g[2] == (sites % 2 == 0 ? 1.0 : -1.0));
    const auto& safe = s.safe_indices();
    // [T12[0], T23[0]] = -T13[0]
    CHECK(max_abs_on(commutator(z(1, 2), z(2, 3)) + z(1, 3), safe) < 1e-10);
    // T11[0] annihilates the vacuum
    CHECK((z(1, 1) * s.vacuum()).norm() < 1e-13);
    CHECK(std::abs(z.vacuum_value(3) - cplx(4.0 * sites / 0.5)) < 1e-11);
    // Z12 = -Delta sum_n psi^dag_1 psi_2
    Operator hop(static_cast<Eigen::Index>(s.dim()), static_cast<Eigen::Index>(s.dim()));
    for (int n = 1; n <= sites; ++n) hop += Operator(s.create(Component::one, n) * s.annihilate(Component::two, n));
    CHECK(Eigen::MatrixXcd(Operator(z(1, 2) + 0.5 * hop)).cwiseAbs().maxCoeff() < 1e-12);

    // [Z_pq, t(w)] = (G_pp/G_qq - 1) T_pq(w); zero for the even chain
    const cplx w(0.7, 0.2);
    const AuxMatrix3 tw = t.at(w);
    const Operator tr = transfer(tw);
    for (int p = 1; p <= 3; ++p)
      for (int q = 1; q <= 3; ++q) {
        const double f = z.g[static_cast<std::size_t>(p - 1)] / z.g[static_cast<std::size_t>(q - 1)] - 1.0;
        CHECK(max_abs_on(commutator(z(p, q), tr) - cplx(f) * tw(p, q), safe) < 1e-10);
        if (sites % 2 == 0 || (p != 3) == (q != 3)) CHECK(max_abs_on(commutator(z(p, q), tr), safe) < 1e-10);
      }
  }
}
