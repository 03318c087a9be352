#include "bethe/kernel.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "bethe/error.hpp"
#include "bethe/lax.hpp"

namespace bethe {

namespace {

constexpr double pi = 3.14159265358979323846;

void require_distinct(cplx x, cplx y) {
  if (std::abs(x - y) < pole_epsilon) throw Error(ErrorKind::pole, "coincident arguments in g(x, y)");
}

// value = c0 + sum coef_k * z[idx_k]
struct LinearFactor {
  cplx c0;
  std::vector<std::pair<int, cplx>> terms;
};

struct Term {
  cplx coeff;
  int twist_index;  // which beta_j multiplies the term
  std::vector<LinearFactor> factors;
};

struct TermEval {
  cplx value;
  Eigen::VectorXcd grad;
};

TermEval evaluate(const Term& t, const Eigen::VectorXcd& z) {
  const std::size_t n = t.factors.size();
  std::vector<cplx> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx v = t.factors[i].c0;
    for (const auto& [k, c] : t.factors[i].terms) v += c * z[k];
    vals[i] = v;
  }
  std::vector<cplx> prefix(n + 1, 1.0), suffix(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * vals[i];
  for (std::size_t i = n; i > 0; --i) suffix[i - 1] = suffix[i] * vals[i - 1];
  TermEval out{t.coeff * prefix[n], Eigen::VectorXcd::Zero(z.size())};
  for (std::size_t i = 0; i < n; ++i) {
    const cplx rest = t.coeff * prefix[i] * suffix[i + 1];
    for (const auto& [k, c] : t.factors[i].terms) out.grad[k] += c * rest;
  }
  return out;
}

// Residual row r is terms[r][0] + terms[r][1].
std::vector<std::array<Term, 2>> residual_terms(const BetheRoots& roots, const ModelParams& p) {
  const int a = roots.a();
  const int b = roots.b();
  const cplx ic(0.0, p.coupling);
  const cplx half(0.0, 0.5 * p.spacing);
  const Twist& tw = roots.twist;
  auto diff = [&](int x, int y, cplx shift) {
    return LinearFactor{shift, {{x, 1.0}, {y, -1.0}}};
  };
  std::vector<std::array<Term, 2>> rows;
  for (int j = 0; j < a; ++j) {
    Term t1{tw.weight(1), 1, {}};
    Term t2{-tw.weight(2) * ((a - 1) % 2 == 0 ? 1.0 : -1.0), 2, {}};
    for (int k = 0; k < a; ++k) {
      if (k == j) continue;
      t1.factors.push_back(diff(k, j, -ic));
      t2.factors.push_back(diff(j, k, -ic));
    }
    for (int l = 0; l < b; ++l) {
      t1.factors.push_back(diff(a + l, j, 0.0));
      t2.factors.push_back(diff(a + l, j, -ic));
    }
    rows.push_back({std::move(t1), std::move(t2)});
  }
  for (int k = 0; k < b; ++k) {
    const int vk = a + k;
    Term t1{tw.weight(3), 3, {}};
    Term t2{-tw.weight(2) * ((b - 1) % 2 == 0 ? 1.0 : -1.0), 2, {}};
    for (int s = 0; s < p.sites; ++s) {
      t1.factors.push_back(LinearFactor{1.0, {{vk, half}}});
      t2.factors.push_back(LinearFactor{1.0, {{vk, -half}}});
    }
    for (int l = 0; l < b; ++l) {
      if (l == k) continue;
      t1.factors.push_back(diff(vk, a + l, -ic));
      t2.factors.push_back(diff(a + l, vk, -ic));
    }
    for (int j = 0; j < a; ++j) {
      t1.factors.push_back(diff(vk, j, 0.0));
      t2.factors.push_back(diff(vk, j, -ic));
    }
    rows.push_back({std::move(t1), std::move(t2)});
  }
  return rows;
}

bool collided(const BetheRoots& r, double c) {
  // f(v, u) appears in denominators of the Bethe vector, so v_l = u_j and
  // v_l = u_j + ic are excluded along with coincidences inside a set.
  for (const auto& x : r.u)
    for (const auto& y : r.v)
      if (std::abs(y - x) < root_separation || std::abs(y - x - cplx(0.0, c)) < root_separation) return true;
  auto check = [](const Roots& xs) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = i + 1; j < xs.size(); ++j)
        if (std::abs(xs[i] - xs[j]) < root_separation) return true;
    return false;
  };
  return check(r.u) || check(r.v);
}

bool finite_and_bounded(const Eigen::VectorXcd& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (!std::isfinite(z[i].real()) || !std::isfinite(z[i].imag()) || std::abs(z[i]) > 1e6) return false;
  return true;
}

bool near_pole(const BetheRoots& r, const ModelParams& p) {
  const cplx pole(0.0, 2.0 / p.spacing);
  for (const auto& x : r.u)
    if (std::abs(x - pole) < root_separation || std::abs(x + pole) < root_separation) return true;
  for (const auto& x : r.v)
    if (std::abs(x - pole) < root_separation || std::abs(x + pole) < root_separation) return true;
  return false;
}

}  // namespace

cplx g_fn(cplx x, cplx y, double c) {
  require_distinct(x, y);
  return cplx(0.0, -c) / (x - y);
}

cplx f_fn(cplx x, cplx y, double c) { return 1.0 + g_fn(x, y, c); }

cplx h_fn(cplx x, cplx y, double c) { return f_fn(x, y, c) / g_fn(x, y, c); }

cplx f_prod(const Roots& xs, const Roots& ys, double c) {
  cplx acc = 1.0;
  for (const auto& x : xs)
    for (const auto& y : ys) acc *= f_fn(x, y, c);
  return acc;
}

cplx r3_fn(cplx u, const ModelParams& p) { return ell3_fn(u, p.spacing, p.sites); }

cplx ell3_fn(cplx u, double spacing, int m) {
  check_lax_pole(u, spacing);
  return std::pow(r0(u, spacing), m);
}

cplx ell3_prod(const Roots& vs, double spacing, int m) {
  cplx acc = 1.0;
  for (const auto& v : vs) acc *= ell3_fn(v, spacing, m);
  return acc;
}

cplx izergin(const Roots& x, const Roots& y, double c) {
  if (x.size() != y.size()) throw Error(ErrorKind::invalid_argument, "Izergin determinant needs |x| = |y|");
  const auto k = static_cast<Eigen::Index>(x.size());
  if (k == 0) return 1.0;
  cplx pre = 1.0;
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index l = j + 1; l < k; ++l)
      pre *= g_fn(x[static_cast<std::size_t>(j)], x[static_cast<std::size_t>(l)], c) *
             g_fn(y[static_cast<std::size_t>(l)], y[static_cast<std::size_t>(j)], c);
  Eigen::MatrixXcd m(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index l = 0; l < k; ++l) {
      const cplx xj = x[static_cast<std::size_t>(j)];
      const cplx yl = y[static_cast<std::size_t>(l)];
      const cplx h = h_fn(xj, yl, c);
      pre *= h;
      m(j, l) = g_fn(xj, yl, c) / h;
    }
  return pre * m.determinant();
}

Eigen::VectorXcd BetheRoots::flat() const {
  Eigen::VectorXcd z(a() + b());
  for (int j = 0; j < a(); ++j) z[j] = u[static_cast<std::size_t>(j)];
  for (int k = 0; k < b(); ++k) z[a() + k] = v[static_cast<std::size_t>(k)];
  return z;
}

BetheRoots BetheRoots::from_flat(const Eigen::VectorXcd& z, int a, const Twist& twist) {
  BetheRoots r;
  r.twist = twist;
  r.u.assign(z.data(), z.data() + a);
  r.v.assign(z.data() + a, z.data() + z.size());
  return r;
}

Eigen::VectorXcd bethe_residual(const BetheRoots& roots, const ModelParams& p) {
  const auto rows = residual_terms(roots, p);
  const Eigen::VectorXcd z = roots.flat();
  Eigen::VectorXcd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    out[static_cast<Eigen::Index>(r)] = evaluate(rows[r][0], z).value + evaluate(rows[r][1], z).value;
  return out;
}

Eigen::MatrixXcd bethe_jacobian(const BetheRoots& roots, const ModelParams& p) {
  const auto rows = residual_terms(roots, p);
  const Eigen::VectorXcd z = roots.flat();
  Eigen::MatrixXcd j(z.size(), z.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    j.row(static_cast<Eigen::Index>(r)) = (evaluate(rows[r][0], z).grad + evaluate(rows[r][1], z).grad).transpose();
  return j;
}

Eigen::MatrixXcd bethe_twist_gradient(const BetheRoots& roots, const ModelParams& p) {
  const auto rows = residual_terms(roots, p);
  const Eigen::VectorXcd z = roots.flat();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(z.size(), 3);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& t : rows[r]) out(static_cast<Eigen::Index>(r), t.twist_index - 1) += evaluate(t, z).value;
  return out;
}

void check_roots(const BetheRoots& roots, const ModelParams& p) {
  if (collided(roots, p.coupling)) throw Error(ErrorKind::pole, "roots coincide or sit on a pole of f(v, u)");
  if (near_pole(roots, p)) throw Error(ErrorKind::pole, "a root sits on a pole of r3");
}

namespace {

struct NewtonOutcome {
  BetheRoots roots;
  double residual;
  bool converged;
};

NewtonOutcome newton(BetheRoots r, const ModelParams& p, const SolverOptions& opts) {
  const int a = r.a();
  Eigen::VectorXcd z = r.flat();
  Eigen::VectorXcd res = bethe_residual(r, p);
  double norm = res.norm();
  int polish = 0;  // extra full steps once below tolerance
  for (int it = 0; it < opts.max_iter; ++it) {
    if (norm < opts.tol && polish++ >= 2) break;
    const Eigen::MatrixXcd jac = bethe_jacobian(r, p);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(jac);
    if (!lu.isInvertible()) return {r, norm, false};
    const Eigen::VectorXcd step = lu.solve(res);
    double damp = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h, damp *= 0.5) {
      const Eigen::VectorXcd trial = z - damp * step;
      if (!finite_and_bounded(trial)) continue;
      BetheRoots cand = BetheRoots::from_flat(trial, a, r.twist);
      if (collided(cand, p.coupling)) continue;
      const Eigen::VectorXcd cres = bethe_residual(cand, p);
      if (cres.norm() < norm) {
        z = trial;
        r = std::move(cand);
        res = cres;
        norm = cres.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  r.residual = norm;
  return {r, norm, norm < opts.tol};
}

}  // namespace

BetheRoots solve_bethe(const BetheRoots& seed, const ModelParams& p, const SolverOptions& opts) {
  if (collided(seed, p.coupling)) throw Error(ErrorKind::pole, "seed roots are not pairwise distinct");
  if (seed.a() + seed.b() == 0) {
    BetheRoots r = seed;
    r.residual = 0.0;
    return r;
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  BetheRoots start = seed;
  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    NewtonOutcome out = newton(start, p, opts);
    if (out.converged && !near_pole(out.roots, p)) return out.roots;
    best = std::min(best, out.residual);
    start = seed;
    for (auto* set : {&start.u, &start.v})
      for (auto& x : *set) x += 0.1 * (1.0 + std::abs(x)) * cplx(normal(rng), normal(rng));
  }
  std::ostringstream os;
  os.precision(3);
  os << "Bethe solver did not converge for sector (" << seed.a() << "," << seed.b()
     << "), best residual " << std::scientific << best;
  throw Error(ErrorKind::convergence, os.str());
}

cplx eigenvalue_tau(cplx w, const BetheRoots& roots, const ModelParams& p) {
  const double c = p.coupling;
  const Twist& tw = roots.twist;
  const Roots ws{w};
  return tw.weight(1) * f_prod(roots.u, ws, c) +
         tw.weight(2) * f_prod(ws, roots.u, c) * f_prod(roots.v, ws, c) +
         tw.weight(3) * r3_fn(w, p) * f_prod(ws, roots.v, c);
}

Eigen::MatrixXcd root_twist_derivative(const BetheRoots& roots, const ModelParams& p) {
  const int n = roots.a() + roots.b();
  if (n == 0) return Eigen::MatrixXcd(0, 3);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(bethe_jacobian(roots, p));
  if (!lu.isInvertible()) throw Error(ErrorKind::singular, "Bethe Jacobian is singular at these roots");
  return -lu.solve(bethe_twist_gradient(roots, p));
}

Eigen::MatrixXcd root_twist_derivative_fd(const BetheRoots& roots, const ModelParams& p,
                                          double h, const SolverOptions& opts) {
  const int n = roots.a() + roots.b();
  Eigen::MatrixXcd out(n, 3);
  for (int j = 1; j <= 3; ++j) {
    BetheRoots plus = roots, minus = roots;
    plus.twist.beta[static_cast<std::size_t>(j - 1)] += h;
    minus.twist.beta[static_cast<std::size_t>(j - 1)] -= h;
    const BetheRoots rp = solve_bethe(plus, p, opts);
    const BetheRoots rm = solve_bethe(minus, p, opts);
    out.col(j - 1) = (rp.flat() - rm.flat()) / (2.0 * h);
  }
  return out;
}

Roots closed_form_01(const ModelParams& p) {
  Roots out;
  for (int k = 0; k < p.sites; ++k) {
    // k = M/2 for even M is the root at infinity
    if (2 * k == p.sites) continue;
    out.emplace_back(-(2.0 / p.spacing) * std::tan(pi * k / p.sites), 0.0);
  }
  return out;
}

namespace {

void combinations(const Roots& pool, int k, std::size_t start, Roots& cur, std::vector<Roots>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < pool.size(); ++i) {
    cur.push_back(pool[i]);
    combinations(pool, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<BetheRoots> sector_seeds(int a, int b, const ModelParams& p, const Twist& twist) {
  if (a < 0 || b < 0) throw Error(ErrorKind::invalid_argument, "negative sector");
  Roots pool = closed_form_01(p);
  // Coarse grid on the real axis, slightly off it, and on the imaginary axis.
  const double scale = 2.0 / p.spacing;
  for (double x : {-1.5, -0.75, -0.3, 0.3, 0.75, 1.5}) pool.emplace_back(x * scale, 0.0);
  for (double x : {-0.5, 0.5}) pool.emplace_back(x * scale, 0.05 * scale);
  for (double y : {-0.4, 0.4}) pool.emplace_back(0.0, y * p.coupling);
  std::vector<Roots> vsets;
  Roots cur;
  combinations(pool, b, 0, cur, vsets);
  std::vector<BetheRoots> seeds;
  for (const auto& vs : vsets) {
    BetheRoots s;
    s.twist = twist;
    s.v = vs;
    cplx mean = 0.0;
    for (const auto& x : vs) mean += x;
    if (!vs.empty()) mean /= static_cast<double>(vs.size());
    for (int j = 0; j < a; ++j) s.u.push_back(mean + cplx(0.3 * j, -0.5 * p.coupling * (1 + j)));
    seeds.push_back(std::move(s));
  }
  return seeds;
}

bool same_roots(const BetheRoots& x, const BetheRoots& y, double tol) {
  auto match = [tol](Roots xs, Roots ys) {
    if (xs.size() != ys.size()) return false;
    for (const auto& a : xs) {
      auto it = std::find_if(ys.begin(), ys.end(), [&](cplx b) { return std::abs(a - b) < tol * (1.0 + std::abs(a)); });
      if (it == ys.end()) return false;
      ys.erase(it);
    }
    return true;
  };
  return match(x.u, y.u) && match(x.v, y.v);
}

std::vector<BetheRoots> find_solutions(int a, int b, const ModelParams& p, int count,
                                       const Twist& twist, const SolverOptions& opts) {
  std::vector<BetheRoots> out;
  if (a + b == 0) {
    BetheRoots vac;
    vac.twist = twist;
    vac.residual = 0.0;
    out.push_back(vac);
    return out;
  }
  SolverOptions quick = opts;
  quick.restarts = 0;
  for (const auto& seed : sector_seeds(a, b, p, twist)) {
    if (static_cast<int>(out.size()) >= count) break;
    try {
      BetheRoots r = solve_bethe(seed, p, quick);
      bool fresh = std::none_of(out.begin(), out.end(), [&](const BetheRoots& o) { return same_roots(o, r); });
      if (fresh) out.push_back(std::move(r));
    } catch (const Error&) {
    }
  }
  return out;
}

}  // namespace bethe
