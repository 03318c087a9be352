#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "bethe/error.hpp"
#include "bethe/harness.hpp"

namespace bethe {

using nlohmann::ordered_json;

namespace {

struct Outcome {
  Outcome(double r = 0.0, double t = 0.0) : residual(r), tolerance(t) {}

  double residual = 0.0;
  double tolerance = 0.0;
  std::string message;
  std::vector<std::pair<std::string, cplx>> values;
  bool extra_ok = true;  // side condition besides residual < tolerance
};

using Rng = std::mt19937_64;

struct Task {
  std::string name;
  std::string inputs;
  std::function<Outcome(Rng&)> fn;
};

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::string tag(const Sector& s) { return "[" + std::to_string(s.first) + "," + std::to_string(s.second) + "]"; }
std::string tag(int i, int j) { return "[" + std::to_string(i) + "," + std::to_string(j) + "]"; }

// T_ij moves a state from sector (a, b) to (a, b) + w_i - w_j.
Sector shifted(const Sector& s, int i, int j) {
  static constexpr int w[3][2] = {{1, 1}, {0, 1}, {0, 0}};
  return {s.first + w[i - 1][0] - w[j - 1][0], s.second + w[i - 1][1] - w[j - 1][1]};
}

cplx random_point(Rng& rng, double re, double im) {
  std::uniform_real_distribution<double> dr(-re, re), di(-im, im);
  const double x = dr(rng);
  const double y = di(rng);
  return {x, y};
}

std::string roots_text(const BetheRoots& r) {
  std::ostringstream os;
  os.precision(6);
  os << "u={";
  for (std::size_t k = 0; k < r.u.size(); ++k) os << (k ? "," : "") << r.u[k];
  os << "} v={";
  for (std::size_t k = 0; k < r.v.size(); ++k) os << (k ? "," : "") << r.v[k];
  os << "}";
  return os.str();
}

struct SectorRoots {
  std::vector<BetheRoots> plain;
  std::vector<BetheRoots> twisted;
  std::optional<BetheRoots> limit_base;  // (a-1, b) roots, for the u = infinity realization
  std::string realization = "none";
};

struct IndexedState {
  Sector sector;
  OnShellState state;
};

struct FormPair {
  int i;
  int j;
  std::size_t bra;
  std::size_t ket;
};

class Context {
 public:
  explicit Context(const ExperimentConfig& c)
      : cfg(c), space(c.params), mono(space), zs(c.z_points()) {
    fit = measure_zero_mode_normalization(c.params);
  }

  const ExperimentConfig& cfg;
  FockSpace space;
  Monodromy mono;
  std::vector<cplx> zs;
  NormalizationFit fit{};
  std::map<Sector, SectorRoots> roots;
  std::vector<IndexedState> states;  // on-shell states of ff_sectors
  std::vector<std::pair<Sector, BetheRoots>> companion_roots;
  std::set<std::string> routes;

  SolverOptions solver() const {
    SolverOptions o;
    o.tol = cfg.tol.onshell;
    o.seed = cfg.seed;
    return o;
  }

  ZeroModes full_modes() const { return zero_modes(mono.rational(), cfg.params.coupling, fit.kappa); }

  const Monodromy& companion() {
    if (cfg.params.sites % 2 == 0) return mono;
    if (!comp_mono_) {
      ModelParams p = cfg.params;
      p.sites += 1;
      comp_space_ = std::make_unique<FockSpace>(p);
      comp_mono_ = std::make_unique<Monodromy>(*comp_space_);
    }
    return *comp_mono_;
  }

  std::vector<FormPair> pairs_for(int i, int j) const {
    std::vector<FormPair> out;
    for (std::size_t k = 0; k < states.size(); ++k)
      for (std::size_t b = 0; b < states.size(); ++b) {
        if (states[b].sector != shifted(states[k].sector, i, j)) continue;
        if (same_roots(states[b].state.roots, states[k].state.roots)) continue;
        out.push_back({i, j, b, k});
      }
    return out;
  }

 private:
  std::unique_ptr<FockSpace> comp_space_;
  std::unique_ptr<Monodromy> comp_mono_;
};

double max_bracket_residual(const ZeroModes& z, const std::vector<std::size_t>& safe) {
  double worst = 0.0;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      for (int k = 1; k <= 3; ++k)
        for (int l = 1; l <= 3; ++l) {
          Operator d = commutator(z(i, j), z(k, l));
          if (i == l) d -= z(k, j);
          if (j == k) d += z(i, l);
          worst = std::max(worst, max_abs_on(d, safe));
        }
  return worst;
}

// [Z_pq, T_rs(z)] = delta_ps (G_ss/G_qq) T_rq - delta_qr T_ps
double mixed_bracket_residual(const Monodromy& t, const ZeroModes& zm, cplx z, bool covariant) {
  const AuxMatrix3 tz = t.at(z);
  const auto& safe = t.space().safe_indices();
  double worst = 0.0;
  for (int p = 1; p <= 3; ++p)
    for (int q = 1; q <= 3; ++q)
      for (int r = 1; r <= 3; ++r)
        for (int s = 1; s <= 3; ++s) {
          Operator d = commutator(zm(p, q), tz(r, s));
          const double ratio = covariant ? zm.g[static_cast<std::size_t>(s - 1)] / zm.g[static_cast<std::size_t>(q - 1)] : 1.0;
          if (p == s) d -= cplx(ratio) * tz(r, q);
          if (q == r) d += tz(p, s);
          worst = std::max(worst, max_abs_on(d, safe));
        }
  return worst;
}

// lim kappa (w/c) B^{a+1,b}({w,u}; v) as w -> infinity.
State limit_state(const Monodromy& t, cplx kappa, const BetheRoots& base) {
  const ModelParams& p = t.space().params();
  std::vector<cplx> sing;
  for (const auto* set : {&base.u, &base.v})
    for (const auto& x : *set)
      for (double shift : {-1.0, 0.0, 1.0}) sing.push_back(x + cplx(0.0, shift * p.coupling));
  return contour_limit(
      [&](cplx s) {
        const cplx w = 1.0 / s;
        BetheRoots r = base;
        r.u.insert(r.u.begin(), w);
        return State(kappa * (w / p.coupling) * build_bv(t, r).state);
      },
      contour_radius(sing, p));
}

bool all_real(const BetheRoots& r) {
  for (const auto* set : {&r.u, &r.v})
    for (const auto& x : *set)
      if (std::abs(x.imag()) > 1e-12) return false;
  return true;
}

Outcome max_outcome(const std::vector<NamedResidual>& rs, double tol) {
  Outcome o;
  o.tolerance = tol;
  std::string worst_name;
  for (const auto& r : rs)
    if (!(r.value <= o.residual)) {
      o.residual = r.value;
      worst_name = r.name;
    }
  o.message = rs.empty() ? "no identities evaluated" : "worst: " + worst_name;
  return o;
}

// ---------------------------------------------------------------- suites

std::vector<Task> suite_rtt(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  std::vector<Task> tasks;
  const std::string n_pairs = "pairs=" + std::to_string(cfg.samples.rtt_pairs);
  tasks.push_back({"rtt.single_site", n_pairs + " M=1", [&cfg](Rng& rng) {
                     ModelParams p1 = cfg.params;
                     p1.sites = 1;
                     const FockSpace s1(p1);
                     const MonodromyBuilder lax = [&](cplx u) { return build_L(s1, u, 1); };
                     Outcome o{0.0, cfg.tol.identity};
                     for (int k = 0; k < cfg.samples.rtt_pairs; ++k) {
                       const cplx u = random_point(rng, 3.0, 0.5), v = random_point(rng, 3.0, 0.5);
                       o.residual = std::max(o.residual, rtt_residual(s1, u, v, lax));
                     }
                     return o;
                   }});
  tasks.push_back({"rtt.monodromy", n_pairs + " M=" + std::to_string(cfg.params.sites), [&ctx](Rng& rng) {
                     const MonodromyBuilder full = [&](cplx u) { return ctx.mono.at(u); };
                     Outcome o{0.0, ctx.cfg.tol.identity};
                     for (int k = 0; k < ctx.cfg.samples.rtt_pairs; ++k) {
                       const cplx u = random_point(rng, 3.0, 0.5), v = random_point(rng, 3.0, 0.5);
                       o.residual = std::max(o.residual, rtt_residual(ctx.space, u, v, full));
                     }
                     return o;
                   }});
  tasks.push_back({"rtt.rational_form", "points=3", [&ctx](Rng& rng) {
                     Outcome o{0.0, ctx.cfg.tol.exact};
                     for (int k = 0; k < 3; ++k) {
                       const cplx u = random_point(rng, 3.0, 0.5);
                       const AuxMatrix3 a = ctx.mono.at(u), b = ctx.mono.product_at(u);
                       for (int i = 1; i <= 3; ++i)
                         for (int j = 1; j <= 3; ++j) {
                           const Operator d = a(i, j) - b(i, j);
                           const double scale = std::max(1.0, Eigen::MatrixXcd(b(i, j)).cwiseAbs().maxCoeff());
                           o.residual = std::max(o.residual, Eigen::MatrixXcd(d).cwiseAbs().maxCoeff() / scale);
                         }
                     }
                     return o;
                   }});
  tasks.push_back({"rtt.yang_baxter", "triples=" + std::to_string(cfg.samples.yang_baxter_triples), [&cfg](Rng& rng) {
                     Outcome o{0.0, cfg.tol.exact};
                     for (int k = 0; k < cfg.samples.yang_baxter_triples; ++k) {
                       const cplx u = random_point(rng, 3.0, 1.0);
                       const cplx v = random_point(rng, 3.0, 1.0);
                       const cplx w = random_point(rng, 3.0, 1.0);
                       o.residual = std::max(o.residual, yang_baxter_residual(u, v, w, cfg.params.coupling));
                     }
                     return o;
                   }});
  tasks.push_back({"rtt.pole_guard", "u=v and u=-2i/Delta", [&ctx](Rng&) {
                     Outcome o{0.0, 0.5};
                     int missed = 0;
                     try {
                       build_R(0.7, 0.7, ctx.cfg.params.coupling);
                       ++missed;
                     } catch (const Error& e) {
                       if (e.kind() != ErrorKind::pole) ++missed;
                     }
                     try {
                       build_L(ctx.space, cplx(0.0, -2.0 / ctx.cfg.params.spacing), 1);
                       ++missed;
                     } catch (const Error& e) {
                       if (e.kind() != ErrorKind::pole) ++missed;
                     }
                     o.residual = missed;
                     o.message = missed ? "a pole was not reported" : "";
                     return o;
                   }});
  return tasks;
}

std::vector<Task> suite_vacuum(Context& ctx) {
  std::vector<Task> tasks;
  const int points = ctx.cfg.samples.vacuum_points;
  auto vacuum_error = [&ctx](const AuxMatrix3& m, cplx d3) {
    const State vac = ctx.space.vacuum();
    const cplx diag[3] = {1.0, 1.0, d3};
    double worst = 0.0;
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= i; ++j) {
        State target = State::Zero(vac.size());
        if (i == j) target = diag[i - 1] * vac;
        worst = std::max(worst, (m(i, j) * vac - target).cwiseAbs().maxCoeff());
      }
    return worst;
  };
  tasks.push_back({"vacuum.lax", "points=" + std::to_string(points) + " every site", [&ctx, points, vacuum_error](Rng& rng) {
                     Outcome o{0.0, ctx.cfg.tol.exact};
                     for (int k = 0; k < points; ++k) {
                       const cplx u = random_point(rng, 3.0, 0.5);
                       for (int n = 1; n <= ctx.cfg.params.sites; ++n)
                         o.residual = std::max(o.residual, vacuum_error(build_L(ctx.space, u, n), r0(u, ctx.cfg.params.spacing)));
                     }
                     return o;
                   }});
  tasks.push_back({"vacuum.monodromy", "points=" + std::to_string(points), [&ctx, points, vacuum_error](Rng& rng) {
                     Outcome o{0.0, ctx.cfg.tol.exact};
                     for (int k = 0; k < points; ++k) {
                       const cplx u = random_point(rng, 3.0, 0.5);
                       const double scale = std::max(1.0, std::abs(ctx.mono.lambda3(u)));
                       o.residual = std::max(o.residual, vacuum_error(ctx.mono.at(u), ctx.mono.lambda3(u)) / scale);
                     }
                     return o;
                   }});
  return tasks;
}

void solve_sectors(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  std::vector<Sector> all = cfg.sectors;
  for (const auto& s : cfg.ff_sectors)
    if (std::find(all.begin(), all.end(), s) == all.end()) all.push_back(s);
  const SolverOptions opts = ctx.solver();
  for (const auto& s : all) {
    SectorRoots sr;
    sr.plain = find_solutions(s.first, s.second, cfg.params, cfg.solutions_per_sector, {}, opts);
    if (!sr.plain.empty()) {
      sr.realization = "finite";
    } else if (s.first >= 1) {
      sr.twisted = find_solutions(s.first, s.second, cfg.params, cfg.solutions_per_sector, cfg.probe_twist, opts);
      const auto base = find_solutions(s.first - 1, s.second, cfg.params, 1, {}, opts);
      if (!base.empty()) sr.limit_base = base.front();
      if (!sr.twisted.empty() && sr.limit_base) sr.realization = "limit+twisted";
    }
    ctx.roots[s] = std::move(sr);
  }
}

std::vector<Task> suite_bethe(Context& ctx) {
  solve_sectors(ctx);
  const ExperimentConfig& cfg = ctx.cfg;
  std::vector<Task> tasks;
  tasks.push_back({"bethe.closed_form_01", "M=" + std::to_string(cfg.params.sites), [&ctx](Rng&) {
                     const ModelParams& p = ctx.cfg.params;
                     const Roots closed = closed_form_01(p);
                     const auto found = find_solutions(0, 1, p, static_cast<int>(closed.size()) + 1, {}, ctx.solver());
                     Outcome o{0.0, ctx.cfg.tol.onshell};
                     for (const auto& v : closed) {
                       double best = INFINITY;
                       for (const auto& r : found) best = std::min(best, std::abs(r.v[0] - v));
                       o.residual = std::max(o.residual, best);
                       o.values.emplace_back("v", v);
                     }
                     if (found.size() != closed.size()) {
                       o.extra_ok = false;
                       o.message = "solver returned " + std::to_string(found.size()) + " roots, closed form has " +
                                   std::to_string(closed.size());
                     }
                     return o;
                   }});
  tasks.push_back({"bethe.twisted_closed_form_11", "twist=probe", [&ctx](Rng&) {
                     const ModelParams& p = ctx.cfg.params;
                     const Twist& tw = ctx.cfg.probe_twist;
                     const cplx i1(0.0, 1.0);
                     const cplx v = (2.0 / p.spacing) * std::tan((tw.beta[0] - tw.beta[2]) / (2.0 * i1 * double(p.sites)));
                     const cplx u = v + i1 * p.coupling / (std::exp(tw.beta[0] - tw.beta[1]) - 1.0);
                     BetheRoots seed{{u + cplx(0.05, 0.02)}, {v - cplx(0.03, 0.01)}, tw};
                     const BetheRoots r = solve_bethe(seed, p, ctx.solver());
                     Outcome o{std::max(std::abs(r.u[0] - u), std::abs(r.v[0] - v)), ctx.cfg.tol.identity};
                     o.values = {{"u", u}, {"v", v}};
                     return o;
                   }});
  tasks.push_back({"bethe.cleared_residual", "all solved sectors", [&ctx](Rng&) {
                     Outcome o{0.0, ctx.cfg.tol.onshell};
                     int count = 0;
                     for (const auto& [s, sr] : ctx.roots) {
                       for (const auto* list : {&sr.plain, &sr.twisted})
                         for (const auto& r : *list) {
                           o.residual = std::max(o.residual, bethe_residual(r, ctx.cfg.params).norm());
                           ++count;
                         }
                       if (sr.limit_base) o.residual = std::max(o.residual, bethe_residual(*sr.limit_base, ctx.cfg.params).norm());
                     }
                     o.message = std::to_string(count) + " root sets";
                     return o;
                   }});
  for (const auto& s : cfg.sectors) {
    tasks.push_back({"bethe.solutions" + tag(s), "count<=" + std::to_string(cfg.solutions_per_sector), [&ctx, s](Rng&) {
                       const SectorRoots& sr = ctx.roots.at(s);
                       Outcome o{0.0, ctx.cfg.tol.onshell};
                       o.message = sr.realization;
                       if (sr.realization == "none") {
                         o.extra_ok = false;
                         o.message = "no finite, twisted or limit realization found";
                       }
                       const auto& list = sr.plain.empty() ? sr.twisted : sr.plain;
                       for (const auto& r : list) o.residual = std::max(o.residual, r.residual);
                       if (!list.empty()) {
                         for (const auto& u : list.front().u) o.values.emplace_back("u", u);
                         for (const auto& v : list.front().v) o.values.emplace_back("v", v);
                       }
                       o.values.emplace_back("solutions", static_cast<double>(list.size()));
                       return o;
                     }});
  }
  return tasks;
}

std::vector<Task> suite_bv(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  std::vector<Task> tasks;
  const std::string pts = "w-points=" + std::to_string(cfg.samples.eigen_points);
  for (const auto& s : cfg.sectors) {
    const SectorRoots& sr = ctx.roots.at(s);
    if (!sr.plain.empty()) {
      tasks.push_back({"bv.on_shell" + tag(s), pts, [&ctx, s](Rng& rng) {
                         Outcome o{0.0, ctx.cfg.tol.eigen};
                         for (const auto& r : ctx.roots.at(s).plain) {
                           const BetheVector bv = build_bv(ctx.mono, r);
                           for (int k = 0; k < ctx.cfg.samples.eigen_points; ++k)
                             o.residual = std::max(o.residual, on_shell_residual(ctx.mono, bv, random_point(rng, 3.0, 1.0)));
                         }
                         return o;
                       }});
      tasks.push_back({"bv.dual_on_shell" + tag(s), pts, [&ctx, s](Rng& rng) {
                         Outcome o{0.0, ctx.cfg.tol.eigen};
                         std::set<std::string> routes;
                         for (const auto& r : ctx.roots.at(s).plain) {
                           const DualBetheVector cv = build_dual_bv(ctx.mono, r, true);
                           routes.insert(cv.route);
                           for (int k = 0; k < ctx.cfg.samples.eigen_points; ++k)
                             o.residual = std::max(o.residual, dual_on_shell_residual(ctx.mono, cv, random_point(rng, 3.0, 1.0)));
                         }
                         for (const auto& rt : routes) o.message += (o.message.empty() ? "route " : ",") + rt;
                         return o;
                       }});
    }
    if (sr.limit_base) {
      tasks.push_back({"bv.on_shell_limit" + tag(s), pts + " u1=infinity", [&ctx, s](Rng& rng) {
                         const BetheRoots& base = *ctx.roots.at(s).limit_base;
                         BetheVector bv{base, limit_state(ctx.mono, ctx.fit.kappa, base), false};
                         Outcome o{0.0, ctx.cfg.tol.eigen};
                         for (int k = 0; k < ctx.cfg.samples.eigen_points; ++k)
                           o.residual = std::max(o.residual, on_shell_residual(ctx.mono, bv, random_point(rng, 3.0, 1.0)));
                         o.values.emplace_back("norm", bv.state.norm());
                         if (bv.state.norm() < 1e-8) {
                           o.extra_ok = false;
                           o.message = "limit vector vanishes";
                         }
                         return o;
                       }});
    }
    if (!sr.twisted.empty()) {
      tasks.push_back({"bv.on_shell_twisted" + tag(s), pts + " twist=probe", [&ctx, s](Rng& rng) {
                         Outcome o{0.0, ctx.cfg.tol.eigen};
                         for (const auto& r : ctx.roots.at(s).twisted) {
                           const BetheVector bv = build_bv(ctx.mono, r);
                           for (int k = 0; k < ctx.cfg.samples.eigen_points; ++k)
                             o.residual = std::max(o.residual, on_shell_residual(ctx.mono, bv, random_point(rng, 3.0, 1.0)));
                         }
                         return o;
                       }});
    }
  }
  return tasks;
}

std::vector<Task> suite_zeromode(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Monodromy& comp = ctx.companion();
  const int mc = comp.space().params().sites;
  ctx.companion_roots.clear();
  for (const auto& s : cfg.sectors) {
    const auto found = find_solutions(s.first, s.second, comp.space().params(), 1, {}, ctx.solver());
    if (!found.empty()) ctx.companion_roots.emplace_back(s, found.front());
  }
  std::vector<Task> tasks;
  tasks.push_back({"zeromode.normalization", "one-site least squares", [&ctx](Rng&) {
                     Outcome o{ctx.fit.residual, ctx.cfg.tol.identity};
                     o.values.emplace_back("kappa", ctx.fit.kappa);
                     return o;
                   }});
  auto brackets = [&ctx](const Monodromy* t) {
    return [&ctx, t](Rng&) {
      const ZeroModes z = zero_modes(t->rational(), ctx.cfg.params.coupling, ctx.fit.kappa);
      Outcome o{max_bracket_residual(z, t->space().safe_indices()), ctx.cfg.tol.identity};
      o.values.emplace_back("G33", z.g[2]);
      return o;
    };
  };
  const std::string m_main = "M=" + std::to_string(cfg.params.sites);
  const std::string m_comp = "M=" + std::to_string(mc);
  tasks.push_back({"zeromode.sl3_brackets[" + m_main + "]", "81 brackets on the safe subspace", brackets(&ctx.mono)});
  if (&comp != &ctx.mono)
    tasks.push_back({"zeromode.sl3_brackets[" + m_comp + "]", "81 brackets on the safe subspace", brackets(&comp)});
  auto mixed = [&ctx](const Monodromy* t, bool covariant) {
    return [&ctx, t, covariant](Rng&) {
      const ZeroModes z = zero_modes(t->rational(), ctx.cfg.params.coupling, ctx.fit.kappa);
      Outcome o{0.0, ctx.cfg.tol.identity};
      for (std::size_t k = 0; k < std::min<std::size_t>(2, ctx.zs.size()); ++k)
        o.residual = std::max(o.residual, mixed_bracket_residual(*t, z, ctx.zs[k], covariant));
      return o;
    };
  };
  tasks.push_back({"zeromode.mixed_brackets[" + m_comp + "]", "literal, 2 z-points", mixed(&comp, false)});
  if (&comp != &ctx.mono)
    tasks.push_back({"zeromode.mixed_brackets_covariant[" + m_main + "]", "G-covariant, 2 z-points", mixed(&ctx.mono, true)});
  tasks.push_back({"zeromode.transfer_commutation[" + m_main + "]", "all z-points", [&ctx](Rng&) {
                     const ZeroModes z = ctx.full_modes();
                     Outcome o{0.0, ctx.cfg.tol.identity};
                     for (const auto& w : ctx.zs) {
                       const AuxMatrix3 tw = ctx.mono.at(w);
                       const Operator t = transfer(tw);
                       for (int p = 1; p <= 3; ++p)
                         for (int q = 1; q <= 3; ++q) {
                           const double f = z.g[static_cast<std::size_t>(p - 1)] / z.g[static_cast<std::size_t>(q - 1)] - 1.0;
                           const Operator d = commutator(z(p, q), t) - cplx(f) * tw(p, q);
                           o.residual = std::max(o.residual, max_abs_on(d, ctx.space.safe_indices()));
                         }
                     }
                     return o;
                   }});
  for (const auto& [s, r] : ctx.companion_roots) {
    tasks.push_back({"zeromode.annihilation" + tag(s) + "[" + m_comp + "]", roots_text(r), [&ctx, &comp, r](Rng&) {
                       const ZeroModes z = zero_modes(comp.rational(), ctx.cfg.params.coupling, ctx.fit.kappa);
                       return max_outcome(zero_mode_action_check(comp, z, r), ctx.cfg.tol.annihilation);
                     }});
  }
  return tasks;
}

std::vector<Task> suite_composite(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  std::vector<Task> tasks;
  std::string cuts;
  for (int m : cfg.effective_cuts()) cuts += (cuts.empty() ? "cuts=" : ",") + std::to_string(m);
  for (const auto& s : cfg.sectors) {
    tasks.push_back({"composite.factorization" + tag(s), cuts + " off-shell x3", [&ctx, s](Rng& rng) {
                       Outcome o{0.0, ctx.cfg.tol.identity};
                       for (int k = 0; k < 3; ++k) {
                         BetheRoots r;
                         for (int a = 0; a < s.first; ++a) r.u.push_back(random_point(rng, 3.0, 1.0));
                         for (int b = 0; b < s.second; ++b) r.v.push_back(random_point(rng, 3.0, 1.0));
                         for (int m : ctx.cfg.effective_cuts())
                           o.residual = std::max(o.residual, composite_bv_residual(ctx.space, r, m));
                       }
                       return o;
                     }});
  }
  return tasks;
}

void build_states(Context& ctx) {
  if (!ctx.states.empty()) return;
  for (const auto& s : ctx.cfg.ff_sectors)
    for (const auto& r : ctx.roots.at(s).plain) {
      ctx.states.push_back({s, make_state(ctx.mono, r)});
      ctx.routes.insert(ctx.states.back().state.cv.route);
    }
}

std::vector<Task> suite_ff_global(Context& ctx) {
  build_states(ctx);
  std::vector<Task> tasks;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      const auto pairs = ctx.pairs_for(i, j);
      if (pairs.empty()) continue;
      tasks.push_back({"ff-global.universal" + tag(i, j), std::to_string(pairs.size()) + " pairs", [&ctx, pairs](Rng&) {
                         Outcome o{0.0, ctx.cfg.tol.form_factor};
                         int nonzero = 0;
                         for (const auto& fp : pairs) {
                           const FormFactorRecord rec =
                               global_ff(ctx.mono, ctx.states[fp.bra].state, ctx.states[fp.ket].state, fp.i, fp.j, ctx.zs);
                           o.residual = std::max(o.residual, rec.spread);
                           if (std::abs(rec.universal) > 1e-12) {
                             if (nonzero == 0) o.values.emplace_back("F", rec.universal);
                             ++nonzero;
                           }
                         }
                         o.message = std::to_string(nonzero) + " nonzero";
                         if (nonzero == 0) {
                           o.extra_ok = false;
                           o.message = "every form factor vanishes";
                         }
                         return o;
                       }});
    }
  const auto worked = ctx.pairs_for(1, 2);
  if (!worked.empty()) {
    tasks.push_back({"ff-global.worked_identity", std::to_string(worked.size()) + " pairs", [&ctx, worked](Rng&) {
                       Outcome o{0.0, ctx.cfg.tol.limit};
                       for (const auto& fp : worked)
                         o.residual = std::max(o.residual, worked_zero_mode_identity(ctx.mono, ctx.fit.kappa,
                                                                                     ctx.states[fp.bra].state,
                                                                                     ctx.states[fp.ket].state, ctx.zs));
                       return o;
                     }});
  }
  return tasks;
}

std::vector<Task> suite_ff_local(Context& ctx) {
  build_states(ctx);
  const ExperimentConfig& cfg = ctx.cfg;
  std::vector<Task> tasks;
  for (int m : cfg.effective_cuts()) {
    const int parity = (cfg.params.sites - m) % 2 == 0 ? 1 : -1;
    tasks.push_back({"ff-local.local_brackets[m=" + std::to_string(m) + "]",
                     parity == 1 ? "literal (M-m even)" : "G-covariant (M-m odd)", [&ctx, m, parity](Rng&) {
                       const ZeroModes loc = local_zero_modes(ctx.space, m, ctx.fit.kappa);
                       const ZeroModes full = ctx.full_modes();
                       const double g2[3] = {1.0, 1.0, static_cast<double>(parity)};
                       Outcome o{0.0, ctx.cfg.tol.identity};
                       for (int i = 1; i <= 3; ++i)
                         for (int j = 1; j <= 3; ++j)
                           for (int k = 1; k <= 3; ++k)
                             for (int l = 1; l <= 3; ++l) {
                               const cplx sigma = g2[k - 1] / g2[l - 1];
                               Operator d = commutator(loc(i, j), full(k, l));
                               if (i == l) d -= sigma * loc(k, j);
                               if (j == k) d += sigma * loc(i, l);
                               o.residual = std::max(o.residual, max_abs_on(d, ctx.space.safe_indices()));
                             }
                       return o;
                     }});
  }
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      std::vector<FormPair> pairs;
      for (const auto& fp : ctx.pairs_for(i, j))
        if (all_real(ctx.states[fp.bra].state.roots) && all_real(ctx.states[fp.ket].state.roots)) pairs.push_back(fp);
      if (pairs.empty()) continue;
      tasks.push_back({"ff-local.modulus_symmetry" + tag(i, j), std::to_string(pairs.size()) + " pairs, every cut",
                       [&ctx, pairs](Rng&) {
                         Outcome o{0.0, ctx.cfg.tol.form_factor};
                         for (int m : ctx.cfg.effective_cuts()) {
                           const ZeroModes loc = local_zero_modes(ctx.space, m, ctx.fit.kappa);
                           for (const auto& fp : pairs) {
                             const OnShellState& c = ctx.states[fp.bra].state;
                             const OnShellState& b = ctx.states[fp.ket].state;
                             const double x = std::abs(bilinear(c.cv.costate, loc(fp.i, fp.j) * b.bv.state));
                             const double y = std::abs(bilinear(b.cv.costate, loc(fp.j, fp.i) * c.bv.state));
                             const double scale = c.cv.costate.norm() * b.bv.state.norm();
                             o.residual = std::max(o.residual, scaled_error(x, y, scale));
                           }
                         }
                         return o;
                       }});
    }
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      if (i == 3 && j == 3) continue;
      const auto pairs = ctx.pairs_for(i, j);
      if (pairs.empty()) continue;
      tasks.push_back({"ff-local.site_identities" + tag(i, j), std::to_string(pairs.size()) + " pairs, every site",
                       [&ctx, pairs](Rng&) {
                         std::vector<NamedResidual> all;
                         for (const auto& fp : pairs) {
                           const auto rs = site_identities(ctx.mono, ctx.states[fp.bra].state, ctx.states[fp.ket].state,
                                                           fp.i, fp.j, ctx.zs);
                           all.insert(all.end(), rs.begin(), rs.end());
                         }
                         return max_outcome(all, ctx.cfg.tol.form_factor);
                       }});
    }
  return tasks;
}

std::vector<Task> suite_twisted(Context& ctx) {
  build_states(ctx);
  const ExperimentConfig& cfg = ctx.cfg;
  std::vector<Task> tasks;
  for (const auto& s : cfg.ff_sectors) {
    if (s.first + s.second == 0) continue;
    const auto& plain = ctx.roots.at(s).plain;
    if (plain.empty()) continue;
    tasks.push_back({"twisted.root_derivative" + tag(s), "fd_step=" + std::to_string(cfg.fd_step), [&ctx, s](Rng&) {
                       Outcome o{0.0, ctx.cfg.tol.derivative};
                       for (const auto& r : ctx.roots.at(s).plain) {
                         const Eigen::MatrixXcd a = root_twist_derivative(r, ctx.cfg.params);
                         const Eigen::MatrixXcd b = root_twist_derivative_fd(r, ctx.cfg.params, ctx.cfg.fd_step, ctx.solver());
                         o.residual = std::max(o.residual, (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()));
                       }
                       return o;
                     }});
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t b = 0; b < ctx.states.size(); ++b)
      for (std::size_t k = 0; k < ctx.states.size(); ++k)
        if (ctx.states[b].sector == s && ctx.states[k].sector == s) pairs.emplace_back(b, k);
    // One evaluation per (pair, cut), shared by the three records of this sector.
    auto reports = std::make_shared<std::vector<GeneratingFunctionalReport>>();
    auto once = std::make_shared<std::once_flag>();
    auto compute = [&ctx, pairs, reports, once]() {
      std::call_once(*once, [&] {
        for (int m : ctx.cfg.effective_cuts()) {
          const ZeroModes loc = local_zero_modes(ctx.space, m, ctx.fit.kappa);
          for (const auto& [b, k] : pairs)
            reports->push_back(generating_functional_check(ctx.mono, loc, m, ctx.states[b].state.roots,
                                                           ctx.states[k].state.roots, ctx.cfg.generating_twist,
                                                           ctx.cfg.fd_step, ctx.solver()));
        }
      });
      return reports;
    };
    const std::string inputs = std::to_string(pairs.size()) + " pairs, every cut, twist=generating";
    tasks.push_back({"twisted.generating_functional" + tag(s), inputs, [&ctx, compute](Rng&) {
                       Outcome o{0.0, ctx.cfg.tol.generating};
                       for (const auto& rep : *compute()) o.residual = std::max(o.residual, rep.g_error);
                       return o;
                     }});
    tasks.push_back({"twisted.diagonal_identity" + tag(s), inputs, [&ctx, compute](Rng&) {
                       Outcome o{0.0, ctx.cfg.tol.generating};
                       for (const auto& rep : *compute())
                         for (const auto& e : rep.diagonal)
                           o.residual = std::max({o.residual, e.error_fd, e.error_implicit});
                       return o;
                     }});
    tasks.push_back({"twisted.fd_vs_implicit" + tag(s), inputs, [&ctx, compute](Rng&) {
                       Outcome o{0.0, ctx.cfg.tol.derivative};
                       for (const auto& rep : *compute())
                         for (const auto& e : rep.diagonal) o.residual = std::max(o.residual, e.fd_vs_implicit);
                       return o;
                     }});
  }
  return tasks;
}

std::vector<Task> suite_results(Context& ctx) {
  build_states(ctx);
  std::vector<Task> tasks;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      const auto pairs = ctx.pairs_for(i, j);
      if (pairs.empty()) continue;
      // Staggered channels (3,k), (k,3) reduce to the lattice form only at even cuts.
      const bool staggered = (i == 3) != (j == 3);
      std::vector<int> cuts;
      for (int m : ctx.cfg.effective_cuts())
        if (!staggered || m % 2 == 0) cuts.push_back(m);
      if (cuts.empty()) continue;
      std::string cut_text;
      for (int m : cuts) cut_text += (cut_text.empty() ? "cuts=" : ",") + std::to_string(m);
      tasks.push_back({"results.local_identity" + tag(i, j), std::to_string(pairs.size()) + " pairs " + cut_text,
                       [&ctx, pairs, cuts](Rng&) {
                         std::vector<NamedResidual> all;
                         for (int m : cuts) {
                           const ZeroModes loc = local_zero_modes(ctx.space, m, ctx.fit.kappa);
                           for (const auto& fp : pairs) {
                             const OnShellState& c = ctx.states[fp.bra].state;
                             const OnShellState& b = ctx.states[fp.ket].state;
                             const FormFactorRecord g = global_ff(ctx.mono, c, b, fp.i, fp.j, ctx.zs);
                             all.push_back(local_operator_identity(loc, m, ctx.cfg.params.spacing, c, b, g));
                           }
                         }
                         return max_outcome(all, ctx.cfg.tol.form_factor);
                       }});
    }
  return tasks;
}

std::vector<Task> suite_continuum(Context& ctx) {
  const ContinuumConfig& cc = ctx.cfg.continuum;
  ContinuumSettings s;
  s.length = cc.length;
  s.coupling = ctx.cfg.params.coupling;
  s.x_fraction = cc.x_fraction;
  s.max_particles = cc.max_particles;
  s.divisions.clear();
  for (double d : cc.delta_sequence) s.divisions.push_back(static_cast<int>(std::lround(cc.length / d)));
  auto series = std::make_shared<std::vector<ContinuumSeries>>();
  auto once = std::make_shared<std::once_flag>();
  auto compute = [s, series, once]() {
    std::call_once(*once, [&] { *series = continuum_limit_check(s); });
    return series;
  };
  std::string inputs = "M=";
  for (std::size_t k = 0; k < s.divisions.size(); ++k) inputs += (k ? "," : "") + std::to_string(s.divisions[k]);
  const char* keys[] = {"lambda3", "psi", "psi_dag", "density", "diagonal_density"};
  std::vector<Task> tasks;
  for (std::size_t k = 0; k < 5; ++k) {
    tasks.push_back({std::string("continuum.") + keys[k], inputs, [&ctx, compute, k](Rng&) {
                       const ContinuumSeries& cs = compute()->at(k);
                       const ContinuumConfig& c = ctx.cfg.continuum;
                       Outcome o{cs.relative_error, ctx.cfg.tol.continuum};
                       o.message = cs.name;
                       o.values = {{"extrapolated", cs.extrapolated}, {"continuum", cs.continuum}, {"rate", cs.rate}};
                       if (!(cs.rate >= c.rate_min && cs.rate <= c.rate_max)) {
                         o.extra_ok = false;
                         o.message = "rate " + std::to_string(cs.rate) + " outside the O(Delta^2) window";
                       }
                       return o;
                     }});
  }
  return tasks;
}

struct SuiteDef {
  const char* name;
  std::vector<const char*> deps;
  std::vector<Task> (*build)(Context&);
};

const std::vector<SuiteDef>& suite_table() {
  static const std::vector<SuiteDef> table = {
      {"rtt", {}, suite_rtt},
      {"vacuum", {}, suite_vacuum},
      {"bethe", {}, suite_bethe},
      {"bv", {"rtt", "vacuum", "bethe"}, suite_bv},
      {"zeromode", {"rtt", "bethe"}, suite_zeromode},
      {"composite", {"rtt", "vacuum"}, suite_composite},
      {"ff-global", {"bv"}, suite_ff_global},
      {"ff-local", {"bv", "zeromode"}, suite_ff_local},
      {"twisted", {"bv", "zeromode"}, suite_twisted},
      {"results", {"ff-global", "ff-local"}, suite_results},
      {"continuum", {"rtt", "bethe"}, suite_continuum},
  };
  return table;
}

const SuiteDef& find_suite(const std::string& name) {
  for (const auto& s : suite_table())
    if (name == s.name) return s;
  throw Error(ErrorKind::config, "unknown suite '" + name + "'");
}

CheckRecord execute(const Task& task, const std::string& suite, const ExperimentConfig& cfg,
                    const std::string& config_digest) {
  CheckRecord rec;
  rec.suite = suite;
  rec.name = task.name;
  rec.inputs = task.inputs;
  rec.digest = hex(fnv1a(task.name + "|" + task.inputs, std::stoull(config_digest, nullptr, 16)));
  Rng rng(cfg.seed ^ fnv1a(task.name));
  const auto start = std::chrono::steady_clock::now();
  try {
    const Outcome o = task.fn(rng);
    rec.residual = o.residual;
    rec.tolerance = o.tolerance;
    rec.message = o.message;
    rec.values = o.values;
    rec.status = (o.extra_ok && std::isfinite(o.residual) && o.residual < o.tolerance) ? CheckStatus::pass
                                                                                        : CheckStatus::fail;
  } catch (const std::exception& e) {
    rec.residual = INFINITY;
    rec.status = CheckStatus::fail;
    rec.message = e.what();
  }
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<CheckRecord> run_tasks(const std::vector<Task>& tasks, const std::string& suite,
                                   const ExperimentConfig& cfg, const std::string& digest, unsigned threads) {
  std::vector<CheckRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) out[k] = execute(tasks[k], suite, cfg, digest);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

ordered_json conventions_json(const Context& ctx) {
  ordered_json j;
  j["izergin"] = "B = sum K_a(v_I|u) f(v_II,v_I) / f(v,u) T13(v_I) T23(v_II) |0>";
  j["tau"] = "e^b1 f(u,w) + e^b2 f(w,u) f(v,w) + e^b3 lambda3(w) f(w,v)";
  j["r3"] = "lambda3 / lambda2 = r0(u)^M";
  j["zero_mode"] = {{"definition", "kappa * lim u (T_ij(u) / G_jj - delta_ij) / c"},
                    {"kappa", {{"re", ctx.fit.kappa.real()}, {"im", ctx.fit.kappa.imag()}}},
                    {"fit_residual", ctx.fit.residual},
                    {"G33", ctx.cfg.params.sites % 2 == 0 ? 1 : -1}};
  std::string routes;
  for (const auto& r : ctx.routes) routes += (routes.empty() ? "" : ",") + r;
  j["dual_bv_route"] = routes.empty() ? "mirror" : routes;
  j["pairing"] = "bilinear (transpose, no conjugation)";
  return j;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : suite_table()) v.emplace_back(s.name);
    return v;
  }();
  return names;
}

std::vector<std::string> resolve_suites(const std::vector<std::string>& requested) {
  std::set<std::string> wanted;
  std::function<void(const std::string&)> add = [&](const std::string& name) {
    const SuiteDef& def = find_suite(name);
    if (!wanted.insert(name).second) return;
    for (const char* d : def.deps) add(d);
  };
  for (const auto& r : requested) add(r);
  std::vector<std::string> out;
  for (const auto& s : suite_table())
    if (wanted.count(s.name)) out.emplace_back(s.name);
  return out;
}

CheckReport run(const ExperimentConfig& cfg, const std::vector<std::string>& suites, const RunOptions& opts) {
  cfg.validate();
  const std::vector<std::string> order = resolve_suites(suites);
  CheckReport report;
  report.config = config_to_json(cfg);
  const std::string digest = hex(fnv1a(report.config.dump()));
  Context ctx(cfg);
  std::map<std::string, bool> ok;
  for (const auto& name : order) {
    const SuiteDef& def = find_suite(name);
    std::string blocker;
    for (const char* d : def.deps)
      if (!ok.at(d) && blocker.empty()) blocker = d;
    if (!blocker.empty()) {
      CheckRecord rec;
      rec.suite = name;
      rec.name = name + ".*";
      rec.inputs = "dependency " + blocker;
      rec.digest = hex(fnv1a(rec.name, std::stoull(digest, nullptr, 16)));
      rec.status = CheckStatus::blocked;
      rec.residual = std::nan("");
      rec.message = "blocked: dependency suite '" + blocker + "' did not pass";
      report.checks.push_back(rec);
      ok[name] = false;
      continue;
    }
    std::vector<CheckRecord> recs;
    try {
      recs = run_tasks(def.build(ctx), name, cfg, digest, opts.threads);
    } catch (const std::exception& e) {
      CheckRecord rec;
      rec.suite = name;
      rec.name = name + ".setup";
      rec.digest = hex(fnv1a(rec.name, std::stoull(digest, nullptr, 16)));
      rec.status = CheckStatus::fail;
      rec.residual = INFINITY;
      rec.message = e.what();
      recs.push_back(rec);
    }
    bool suite_ok = true;
    for (const auto& r : recs) suite_ok = suite_ok && r.status == CheckStatus::pass;
    ok[name] = suite_ok;
    report.checks.insert(report.checks.end(), recs.begin(), recs.end());
  }
  report.conventions = conventions_json(ctx);
  return report;
}

}  // namespace bethe
