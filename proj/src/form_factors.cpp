#include "bethe/form_factors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "bethe/error.hpp"

namespace bethe {

namespace {

constexpr double two_pi = 6.28318530717958647692;

cplx apply_bilinear(const OnShellState& bra, const Operator& op, const OnShellState& ket) {
  return bilinear(bra.cv.costate, op * ket.bv.state);
}

double pair_scale(const OnShellState& bra, const OnShellState& ket) {
  return bra.cv.costate.norm() * ket.bv.state.norm();
}

std::vector<std::size_t> sector_indices(const FockSpace& space, int b) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < space.dim(); ++i)
    if (space.total_particles(i) == b) out.push_back(i);
  return out;
}

// dS/dr_k for S(r) = C(r) . B by a Cauchy integral around r_k.
Eigen::VectorXcd scalar_product_root_gradient(const Monodromy& t, const BetheRoots& bra, const State& ket) {
  const Eigen::VectorXcd z0 = bra.flat();
  Eigen::VectorXcd grad(z0.size());
  constexpr int points = 16;
  for (Eigen::Index k = 0; k < z0.size(); ++k) {
    const double radius = 1e-2;
    cplx acc = 0.0;
    for (int p = 0; p < points; ++p) {
      const cplx e = std::polar(1.0, two_pi * (p + 0.5) / points);
      Eigen::VectorXcd z = z0;
      z[k] += radius * e;
      const BetheRoots r = BetheRoots::from_flat(z, bra.a(), bra.twist);
      acc += bilinear(build_dual_bv(t, r).costate, ket) / e;
    }
    grad[k] = acc / (points * radius);
  }
  return grad;
}

}  // namespace

OnShellState make_state(const Monodromy& t, const BetheRoots& roots) {
  return OnShellState{roots, build_bv(t, roots), build_dual_bv(t, roots, true)};
}

std::vector<cplx> default_z_samples() { return {0.3, 0.9, 1.7, -1.1, 2.4}; }

cplx momentum(const BetheRoots& ket, const BetheRoots& bra) {
  cplx p = 0.0;
  for (const auto& v : ket.v) p += v;
  for (const auto& v : bra.v) p -= v;
  return p;
}

cplx ell_ratio(const BetheRoots& ket, const BetheRoots& bra, double spacing, int m) {
  return ell3_prod(ket.v, spacing, m) / ell3_prod(bra.v, spacing, m);
}

FormFactorRecord global_ff(const Monodromy& t, const OnShellState& bra, const OnShellState& ket,
                           int i, int j, const std::vector<cplx>& zs) {
  if (same_roots(bra.roots, ket.roots))
    throw Error(ErrorKind::singular, "universal form factor needs distinct bra and ket roots");
  const ModelParams& p = t.space().params();
  FormFactorRecord rec;
  rec.kind = "global";
  rec.i = i;
  rec.j = j;
  rec.bra = bra.roots;
  rec.ket = ket.roots;
  rec.momentum = momentum(ket.roots, bra.roots);
  rec.ell_ratio = ell_ratio(ket.roots, bra.roots, p.spacing, p.sites);
  std::vector<cplx> univ;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    cplx z = zs[k];
    cplx dt = eigenvalue_tau(z, bra.roots, p) - eigenvalue_tau(z, ket.roots, p);
    // re-draw a degenerate sample point
    for (int tries = 0; std::abs(dt) < 1e-10 && tries < 8; ++tries) {
      z += cplx(0.137, 0.061);
      dt = eigenvalue_tau(z, bra.roots, p) - eigenvalue_tau(z, ket.roots, p);
    }
    if (std::abs(dt) < 1e-10) throw Error(ErrorKind::singular, "tau_C - tau_B vanishes at every sample point");
    const cplx val = bilinear(bra.cv.costate, t.apply(i, j, z, ket.bv.state));
    if (k == 0) {
      rec.value = val;
      rec.tau_difference = dt;
    }
    univ.push_back(val / dt);
  }
  cplx mean = 0.0;
  for (const auto& x : univ) mean += x;
  mean /= static_cast<double>(univ.size());
  rec.universal = mean;
  double dev = 0.0;
  for (const auto& x : univ) dev = std::max(dev, std::abs(x - mean));
  const double floor = 1e-14 * pair_scale(bra, ket);
  rec.spread = std::abs(mean) > floor ? dev / std::abs(mean) : dev / std::max(floor, 1e-300);
  if (std::abs(mean) <= floor && dev <= floor) rec.spread = 0.0;
  return rec;
}

ZeroModes local_zero_modes(const FockSpace& space, int m, cplx kappa) {
  return zero_modes(build_monodromy_rational(space, SiteRange{1, m}), space.params().coupling, kappa);
}

FormFactorRecord local_ff(const ZeroModes& local, int m, const OnShellState& bra,
                          const OnShellState& ket, int i, int j) {
  FormFactorRecord rec;
  rec.kind = "local";
  rec.i = i;
  rec.j = j;
  rec.m = m;
  rec.bra = bra.roots;
  rec.ket = ket.roots;
  rec.value = apply_bilinear(bra, local(i, j), ket);
  rec.momentum = momentum(ket.roots, bra.roots);
  return rec;
}

cplx twisted_scalar_product(const Monodromy& t, const BetheRoots& twisted_bra, const BetheRoots& ket) {
  return bilinear(build_dual_bv(t, twisted_bra).costate, build_bv(t, ket).state);
}

double scaled_error(cplx lhs, cplx rhs, double scale) {
  const double big = std::max(std::abs(lhs), std::abs(rhs));
  if (big > 1e-12 * scale) return std::abs(lhs - rhs) / big;
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs);
}

GeneratingFunctionalReport generating_functional_check(const Monodromy& t, const ZeroModes& local, int m,
                                                       const BetheRoots& bra, const BetheRoots& ket,
                                                       const Twist& twist, double fd_step,
                                                       const SolverOptions& opts) {
  const FockSpace& space = t.space();
  const ModelParams& p = space.params();
  GeneratingFunctionalReport rep;
  rep.ell_vacuum1 = local.vacuum_value(1);
  rep.ell_vacuum3 = local.vacuum_value(3);
  const BetheVector bv = build_bv(t, ket);

  BetheRoots twisted = bra;
  twisted.twist = twist;
  const BetheRoots cb = twist.is_zero() ? bra : solve_bethe(twisted, p, opts);
  const State cstate = build_dual_bv(t, cb).costate;
  const auto sector = sector_indices(space, ket.b());
  Operator q = twist.beta[0] * local(1, 1);
  q += twist.beta[1] * local(2, 2);
  q += twist.beta[2] * local(3, 3);
  const Eigen::MatrixXcd block = restrict_to(q, sector);
  const Eigen::MatrixXcd expq = block.exp();
  Eigen::VectorXcd cs(static_cast<Eigen::Index>(sector.size())), bs(static_cast<Eigen::Index>(sector.size()));
  for (std::size_t k = 0; k < sector.size(); ++k) {
    cs[static_cast<Eigen::Index>(k)] = cstate[static_cast<Eigen::Index>(sector[k])];
    bs[static_cast<Eigen::Index>(k)] = bv.state[static_cast<Eigen::Index>(sector[k])];
  }
  rep.g_lhs = (cs.transpose() * expq * bs)(0, 0);
  const cplx s_beta = bilinear(cstate, bv.state);
  rep.g_rhs = std::exp(twist.beta[0] * rep.ell_vacuum1 + twist.beta[2] * rep.ell_vacuum3) *
              ell_ratio(ket, cb, p.spacing, m) * s_beta;
  const double gscale = cstate.norm() * bv.state.norm();
  rep.g_error = scaled_error(rep.g_lhs, rep.g_rhs, gscale);

  // Derivative identities at beta = 0.
  const State c0 = build_dual_bv(t, bra).costate;
  const double scale = c0.norm() * bv.state.norm();
  const bool diagonal = same_roots(bra, ket);
  const Eigen::MatrixXcd implicit = root_twist_derivative(bra, p);
  if (diagonal) {
    const Eigen::MatrixXcd fd = root_twist_derivative_fd(bra, p, fd_step, opts);
    const cplx norm2 = bilinear(c0, bv.state);
    for (int jj = 1; jj <= 3; ++jj) {
      DiagonalEntry e;
      e.index = jj;
      e.lhs = bilinear(c0, local(jj, jj) * bv.state);
      auto rhs_with = [&](const Eigen::MatrixXcd& d) {
        cplx acc = (jj == 1 ? rep.ell_vacuum1 : 0.0) + (jj == 3 ? rep.ell_vacuum3 : 0.0);
        for (int k = 0; k < bra.b(); ++k) {
          const cplx v = bra.v[static_cast<std::size_t>(k)];
          const cplx dlog = static_cast<double>(m) * cplx(0.0, p.spacing) / (1.0 + v * v * p.spacing * p.spacing / 4.0);
          acc -= dlog * d(bra.a() + k, jj - 1);
        }
        return acc * norm2;
      };
      e.rhs_implicit = rhs_with(implicit);
      e.rhs_fd = rhs_with(fd);
      e.error_implicit = scaled_error(e.lhs, e.rhs_implicit, scale);
      e.error_fd = scaled_error(e.lhs, e.rhs_fd, scale);
      e.fd_vs_implicit = scaled_error(e.rhs_fd, e.rhs_implicit, scale);
      rep.diagonal.push_back(e);
    }
    return rep;
  }
  const cplx ratio_minus_one = ell_ratio(ket, bra, p.spacing, m) - 1.0;
  const Eigen::VectorXcd grad = bra.a() + bra.b() > 0 ? scalar_product_root_gradient(t, bra, bv.state)
                                                     : Eigen::VectorXcd(0);
  for (int ii = 1; ii <= 3; ++ii) {
    DiagonalEntry e;
    e.index = ii;
    e.lhs = bilinear(c0, local(ii, ii) * bv.state);
    BetheRoots plus = bra, minus = bra;
    plus.twist.beta[static_cast<std::size_t>(ii - 1)] += fd_step;
    minus.twist.beta[static_cast<std::size_t>(ii - 1)] -= fd_step;
    const cplx sp = bilinear(build_dual_bv(t, solve_bethe(plus, p, opts)).costate, bv.state);
    const cplx sm = bilinear(build_dual_bv(t, solve_bethe(minus, p, opts)).costate, bv.state);
    const cplx ds_fd = (sp - sm) / (2.0 * fd_step);
    const cplx ds_implicit = grad.size() > 0 ? grad.cwiseProduct(implicit.col(ii - 1)).sum() : cplx(0.0);
    e.rhs_fd = ratio_minus_one * ds_fd;
    e.rhs_implicit = ratio_minus_one * ds_implicit;
    e.error_fd = scaled_error(e.lhs, e.rhs_fd, scale);
    e.error_implicit = scaled_error(e.lhs, e.rhs_implicit, scale);
    e.fd_vs_implicit = scaled_error(e.rhs_fd, e.rhs_implicit, scale);
    rep.diagonal.push_back(e);
  }
  return rep;
}

double worked_zero_mode_identity(const Monodromy& t, cplx kappa, const OnShellState& bra,
                                 const OnShellState& ket, const std::vector<cplx>& zs) {
  const ModelParams& p = t.space().params();
  const double c = p.coupling;
  const FormFactorRecord f12 = global_ff(t, bra, ket, 1, 2, zs);
  std::vector<cplx> sing;
  for (const auto* set : {&ket.roots.u, &ket.roots.v})
    for (const auto& x : *set)
      for (double shift : {-1.0, 0.0, 1.0}) sing.push_back(x + cplx(0.0, shift * c));
  for (const auto& z : zs) sing.push_back(z);
  const double radius = contour_radius(sing, p);
  double worst = 0.0;
  for (const auto& z : zs) {
    // The numerator has a finite limit and tau of the extended ket tends to tau_B.
    const State lim = contour_limit(
        [&](cplx s) {
          const cplx w = 1.0 / s;
          BetheRoots r = ket.roots;
          r.u.insert(r.u.begin(), w);
          State out(1);
          out[0] = kappa * (w / c) * bilinear(bra.cv.costate, t.apply(2, 2, z, build_bv(t, r).state));
          return out;
        },
        radius);
    const cplx dt = eigenvalue_tau(z, bra.roots, p) - eigenvalue_tau(z, ket.roots, p);
    worst = std::max(worst, scaled_error(lim[0] / dt, f12.universal, 0.0));
  }
  return worst;
}

NamedResidual local_operator_identity(const ZeroModes& local, int m, double spacing, const OnShellState& bra,
                                      const OnShellState& ket, const FormFactorRecord& global) {
  const cplx lhs = apply_bilinear(bra, local(global.i, global.j), ket);
  const cplx rhs = (ell_ratio(ket.roots, bra.roots, spacing, m) - 1.0) * global.universal;
  const std::string name = "C Z1_" + std::to_string(global.i) + std::to_string(global.j) + "(m=" +
                           std::to_string(m) + ") B = (ell-ratio - 1) F";
  return {name, scaled_error(lhs, rhs, pair_scale(bra, ket))};
}

std::vector<NamedResidual> site_identities(const Monodromy& t, const OnShellState& bra,
                                           const OnShellState& ket, int i, int j,
                                           const std::vector<cplx>& zs) {
  const FockSpace& space = t.space();
  const ModelParams& p = space.params();
  const FormFactorRecord g = global_ff(t, bra, ket, i, j, zs);
  const cplx rho = ell_ratio(ket.roots, bra.roots, p.spacing, 1);
  const double scale = pair_scale(bra, ket);
  const cplx ic(0.0, p.coupling);
  std::vector<NamedResidual> out;
  for (int n = 1; n <= p.sites; ++n) {
    const SiteDensities dens = space.densities(n);
    Operator op;
    cplx pred;
    std::string label;
    if (i == 3 && j != 3) {
      op = dens.q * space.annihilate(j == 1 ? Component::one : Component::two, n);
      pred = 0.5 * ic * (1.0 + 1.0 / rho) * std::pow(rho, n) * g.universal;
      label = "Q psi_" + std::to_string(j);
    } else if (j == 3 && i != 3) {
      op = space.create(i == 1 ? Component::one : Component::two, n) * dens.q;
      pred = 0.5 * ic * (1.0 + 1.0 / rho) * std::pow(rho, n) * g.universal;
      label = "psi^dag_" + std::to_string(i) + " Q";
    } else if (i != 3 && j != 3) {
      op = space.create(i == 1 ? Component::one : Component::two, n) *
           space.annihilate(j == 1 ? Component::one : Component::two, n);
      pred = -(std::pow(rho, n) - std::pow(rho, n - 1)) * g.universal / p.spacing;
      label = "psi^dag_" + std::to_string(i) + " psi_" + std::to_string(j);
    } else {
      throw Error(ErrorKind::invalid_argument, "no site identity for (3,3)");
    }
    const cplx val = apply_bilinear(bra, op, ket);
    out.push_back({label + "(" + std::to_string(n) + ")", scaled_error(val, pred, scale)});
  }
  return out;
}

}  // namespace bethe
