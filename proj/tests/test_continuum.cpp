#include <doctest.h>

#include <cmath>

#include "bethe/continuum.hpp"
#include "bethe/error.hpp"
#include "bethe/lax.hpp"

using namespace bethe;

TEST_CASE("Richardson extrapolation of an exact h^2 series") {
  // q(h) = 3 + 2h^2 + 5h^4 is removed exactly by the two-level table
  std::vector<cplx> q;
  for (double h : {0.4, 0.2, 0.1}) q.push_back(3.0 + 2.0 * h * h + 5.0 * std::pow(h, 4));
  const RichardsonResult r = richardson(q);
  CHECK(std::abs(r.extrapolated - cplx(3.0)) < 1e-12);
  // observed rate includes the h^4 contamination: log2(0.36 / 0.0675)
  CHECK(r.rate == doctest::Approx(std::log2(0.36 / 0.0675)).epsilon(1e-12));
  CHECK_THROWS_AS(richardson({1.0, 2.0}), Error);
}

TEST_CASE("lambda3 converges to exp(iuL) at rate two") {
  const double len = 1.0;
  std::vector<double> err;
  for (int sites : {4, 8, 16}) err.push_back(std::abs(std::pow(r0(1.0, len / sites), sites) - std::exp(cplx(0.0, len))));
  CHECK(std::abs(err[0] / err[1] - 4.0) < 0.1);
  CHECK(std::abs(err[1] / err[2] - 4.0) < 0.05);
  CHECK(std::abs(std::pow(r0(0.0, 0.01), 100) - cplx(1.0)) < 1e-15);
}

TEST_CASE("continuum layer") {
  const ContinuumSettings s;
  const auto series = continuum_limit_check(s);
  REQUIRE(series.size() == 5);
  for (const auto& cs : series) {
    CAPTURE(cs.name);
    CHECK(cs.spacings.size() == 3);
    CHECK(cs.relative_error < 1e-3);
    CHECK(cs.rate >= 1.7);
    CHECK(cs.rate <= 2.3);
    // extrapolation improves on the finest lattice value
    CHECK(std::abs(cs.extrapolated - cs.continuum) <= std::abs(cs.lattice.back() - cs.continuum));
  }
}

TEST_CASE("continuum settings are validated") {
  ContinuumSettings s;
  s.x_fraction = 0.3;
  CHECK_THROWS_AS(continuum_limit_check(s), Error);
}
