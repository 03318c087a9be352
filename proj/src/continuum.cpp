#include "bethe/continuum.hpp"

#include <cmath>
#include <sstream>

#include "bethe/error.hpp"

namespace bethe {

namespace {

constexpr double pi = 3.14159265358979323846;

// One-particle root nearest the continuum momentum 2 pi k / L.
BetheRoots one_particle(const ModelParams& p, int k) {
  BetheRoots seed;
  seed.v = {cplx(2.0 * pi * k / p.length(), 0.0)};
  return solve_bethe(seed, p);
}

// Average of a site observable over the bond between sites n and n+1,
// which sits at x = n Delta.
template <class F>
cplx bond_average(int n, F&& site_value) {
  return 0.5 * (site_value(n) + site_value(n + 1));
}

struct Lattice {
  ModelParams params;
  FockSpace space;
  Monodromy t;
  int n;  // bond index with x = n Delta

  Lattice(const ContinuumSettings& s, int sites)
      : params{sites, s.length / sites, s.coupling, s.max_particles},
        space(params),
        t(space),
        n(static_cast<int>(std::lround(s.x_fraction * sites))) {
    if (std::abs(n * params.spacing - s.x_fraction * s.length) > 1e-12)
      throw Error(ErrorKind::invalid_argument, "x is not a lattice bond for every spacing");
    if (n < 1 || n >= sites) throw Error(ErrorKind::invalid_argument, "x must lie strictly inside the chain");
  }
};

}  // namespace

RichardsonResult richardson(const std::vector<cplx>& values) {
  if (values.size() < 3) throw Error(ErrorKind::invalid_argument, "Richardson needs at least three values");
  RichardsonResult out;
  std::vector<cplx> row = values;
  double factor = 4.0;
  while (row.size() > 1) {
    std::vector<cplx> next;
    for (std::size_t k = 0; k + 1 < row.size(); ++k) next.push_back((factor * row[k + 1] - row[k]) / (factor - 1.0));
    row = std::move(next);
    factor *= 4.0;
  }
  out.extrapolated = row.front();
  const std::size_t n = values.size();
  out.rate = std::log2(std::abs(values[n - 3] - values[n - 2]) / std::abs(values[n - 2] - values[n - 1]));
  return out;
}

std::vector<ContinuumSeries> continuum_limit_check(const ContinuumSettings& s) {
  const double len = s.length;
  const double c = s.coupling;
  const double x = s.x_fraction * len;
  const double p1 = 2.0 * pi / len;  // continuum momentum of the k = 1 root
  const cplx i1(0.0, 1.0);
  const auto zs = default_z_samples();

  ContinuumSeries lam{"lambda3(u) -> exp(iuL)", {}, {}, std::exp(i1 * s.u * len)};
  ContinuumSeries psi{"psi_2(x): F / F^(3,2) -> i sqrt(c) exp(ixP)", {}, {}, i1 * std::sqrt(c) * std::exp(i1 * x * p1)};
  ContinuumSeries psid{"psi^dag_2(x): F / F^(2,3) -> i sqrt(c) exp(ixP)", {}, {},
                       i1 * std::sqrt(c) * std::exp(-i1 * x * p1)};
  ContinuumSeries dens{"psi^dag_2 psi_2(x): F / F^(2,2) -> -iP exp(ixP)", {}, {}, -i1 * p1 * std::exp(i1 * x * p1)};
  ContinuumSeries diag{"<psi^dag_2 psi_2(x)> / (i sum dv/dbeta_2 |B|^2) -> 1", {}, {}, 1.0};

  for (int sites : s.divisions) {
    const Lattice lat(s, sites);
    const double d = lat.params.spacing;
    const FockSpace& space = lat.space;
    for (auto* series : {&lam, &psi, &psid, &dens, &diag}) series->spacings.push_back(d);

    lam.lattice.push_back(std::pow(r0(s.u, d), sites));

    const OnShellState vac = make_state(lat.t, BetheRoots{});
    const OnShellState k0 = make_state(lat.t, one_particle(lat.params, 0));
    const OnShellState k1 = make_state(lat.t, one_particle(lat.params, 1));

    auto element = [&](const OnShellState& bra, const OnShellState& ket, auto&& op_at) {
      return bond_average(lat.n, [&](int site) { return bilinear(bra.cv.costate, op_at(site) * ket.bv.state); });
    };

    const FormFactorRecord f32 = global_ff(lat.t, vac, k1, 3, 2, zs);
    psi.lattice.push_back(element(vac, k1, [&](int n) { return space.annihilate(Component::two, n); }) / f32.universal);

    const FormFactorRecord f23 = global_ff(lat.t, k1, vac, 2, 3, zs);
    psid.lattice.push_back(element(k1, vac, [&](int n) { return space.create(Component::two, n); }) / f23.universal);

    const FormFactorRecord f22 = global_ff(lat.t, k0, k1, 2, 2, zs);
    auto density = [&](int n) {
      return Operator(space.create(Component::two, n) * space.annihilate(Component::two, n));
    };
    dens.lattice.push_back(element(k0, k1, density) / f22.universal);

    const Eigen::MatrixXcd dv = root_twist_derivative(k1.roots, lat.params);
    const cplx norm2 = bilinear(k1.cv.costate, k1.bv.state);
    diag.lattice.push_back(element(k1, k1, density) / (i1 * dv(0, 1) * norm2));
  }

  std::vector<ContinuumSeries> out{lam, psi, psid, dens, diag};
  for (auto& series : out) {
    const RichardsonResult r = richardson(series.lattice);
    series.extrapolated = r.extrapolated;
    series.rate = r.rate;
    series.relative_error = std::abs(r.extrapolated - series.continuum) / std::abs(series.continuum);
  }
  return out;
}

}  // namespace bethe
