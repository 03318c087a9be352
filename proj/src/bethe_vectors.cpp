#include "bethe/bethe_vectors.hpp"

#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bethe/error.hpp"

namespace bethe {

namespace {

constexpr double two_pi = 6.28318530717958647692;

void partitions_rec(const Roots& ground, const std::vector<int>& profile, std::size_t slot,
                    std::vector<bool>& used, std::vector<Roots>& cur, std::size_t start,
                    std::vector<std::vector<Roots>>& out) {
  if (slot == profile.size()) {
    out.push_back(cur);
    return;
  }
  Roots& block = cur[slot];
  if (static_cast<int>(block.size()) == profile[slot]) {
    partitions_rec(ground, profile, slot + 1, used, cur, 0, out);
    return;
  }
  for (std::size_t i = start; i < ground.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    block.push_back(ground[i]);
    partitions_rec(ground, profile, slot, used, cur, i + 1, out);
    block.pop_back();
    used[i] = false;
  }
}

std::vector<std::pair<Roots, Roots>> two_block_splits(const Roots& ground, int first) {
  std::vector<std::pair<Roots, Roots>> out;
  PartitionEnumerator pe{ground, {first, static_cast<int>(ground.size()) - first}};
  for (auto& blocks : pe.enumerate()) out.emplace_back(std::move(blocks[0]), std::move(blocks[1]));
  return out;
}

double bv_norm_guard(const State& x) {
  const double n = x.norm();
  if (n == 0.0) throw Error(ErrorKind::validation, "Bethe vector vanishes");
  return n;
}

}  // namespace

std::vector<std::vector<Roots>> PartitionEnumerator::enumerate() const {
  std::vector<std::vector<Roots>> out;
  int total = 0;
  for (int s : profile) {
    if (s < 0) return out;
    total += s;
  }
  if (total != static_cast<int>(ground.size())) return out;
  std::vector<bool> used(ground.size(), false);
  std::vector<Roots> cur(profile.size());
  partitions_rec(ground, profile, 0, used, cur, 0, out);
  return out;
}

BetheVector build_bv(const Monodromy& t, const BetheRoots& roots, const State* start) {
  const FockSpace& space = t.space();
  const double c = space.params().coupling;
  // Creating the b-th particle passes through states with b+1 particles.
  space.params().require_particles(roots.b() + 1);
  BetheVector bv{roots, State::Zero(static_cast<Eigen::Index>(space.dim())), false};
  if (roots.a() > roots.b()) {
    bv.empty_sector = true;
    return bv;
  }
  const State init = start ? *start : space.vacuum();
  const cplx denom = f_prod(roots.v, roots.u, c);
  for (const auto& [vi, vii] : two_block_splits(roots.v, roots.a())) {
    const cplx coef = izergin(vi, roots.u, c) * f_prod(vii, vi, c) / denom;
    State st = init;
    for (auto it = vii.rbegin(); it != vii.rend(); ++it) st = t.apply(2, 3, *it, st);
    for (auto it = vi.rbegin(); it != vi.rend(); ++it) st = t.apply(1, 3, *it, st);
    bv.state += coef * st;
  }
  return bv;
}

namespace {

DualBetheVector mirror_dual(const Monodromy& t, const BetheRoots& roots) {
  const FockSpace& space = t.space();
  const double c = space.params().coupling;
  space.params().require_particles(roots.b() + 1);
  DualBetheVector cv{roots, State::Zero(static_cast<Eigen::Index>(space.dim())), "mirror"};
  if (roots.a() > roots.b()) return cv;
  const cplx denom = f_prod(roots.v, roots.u, c);
  for (const auto& [vi, vii] : two_block_splits(roots.v, roots.a())) {
    const cplx coef = izergin(vi, roots.u, c) * f_prod(vii, vi, c) / denom;
    State st = space.vacuum();
    for (const auto& w : vii) st = t.apply_left(3, 2, w, st);
    for (const auto& w : vi) st = t.apply_left(3, 1, w, st);
    cv.costate += coef * st;
  }
  return cv;
}

// Left eigenvector of t_beta(w) in the number-b sector with eigenvalue
// closest to tau(w), scaled to reproduce `pairing` against B.
State diagonalization_dual(const Monodromy& t, const BetheRoots& roots, cplx w, const State& b,
                           cplx pairing) {
  const FockSpace& space = t.space();
  std::vector<std::size_t> sector;
  for (std::size_t i = 0; i < space.dim(); ++i)
    if (space.total_particles(i) == roots.b()) sector.push_back(i);
  const Eigen::MatrixXcd block = restrict_to(transfer(t.at(w), roots.twist), sector);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(block.transpose());
  const cplx tau = eigenvalue_tau(w, roots, space.params());
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < es.eigenvalues().size(); ++k)
    if (std::abs(es.eigenvalues()[k] - tau) < std::abs(es.eigenvalues()[best] - tau)) best = k;
  State out = State::Zero(static_cast<Eigen::Index>(space.dim()));
  for (std::size_t k = 0; k < sector.size(); ++k)
    out[static_cast<Eigen::Index>(sector[k])] = es.eigenvectors()(static_cast<Eigen::Index>(k), best);
  const cplx raw = bilinear(out, b);
  if (std::abs(raw) > 0.0 && std::abs(pairing) > 0.0) out *= pairing / raw;
  return out;
}

}  // namespace

DualBetheVector build_dual_bv(const Monodromy& t, const BetheRoots& roots, bool validate) {
  DualBetheVector cv = mirror_dual(t, roots);
  if (!validate || roots.a() > roots.b()) return cv;
  const ModelParams& p = t.space().params();
  if (bethe_residual(roots, p).norm() >= tol_onshell_default) return cv;
  const cplx w(0.37, 0.21);
  const double mirror_res = dual_on_shell_residual(t, cv, w);
  if (mirror_res < 1e-8) return cv;
  const BetheVector bv = build_bv(t, roots);
  const cplx pairing = bilinear(cv.costate, bv.state);
  DualBetheVector fb{roots, diagonalization_dual(t, roots, w, bv.state, pairing), "diagonalization"};
  const double fb_res = dual_on_shell_residual(t, fb, cplx(-0.53, 0.44));
  if (fb_res >= 1e-8) {
    std::ostringstream os;
    os << "dual Bethe vector failed validation: mirror residual " << mirror_res
       << ", diagonalization residual " << fb_res;
    throw Error(ErrorKind::validation, os.str());
  }
  return fb;
}

double on_shell_residual(const Monodromy& t, const BetheVector& bv, cplx w) {
  const double n = bv_norm_guard(bv.state);
  const cplx tau = eigenvalue_tau(w, bv.roots, t.space().params());
  return (apply_transfer(t, w, bv.state, bv.roots.twist) - tau * bv.state).norm() / n;
}

double dual_on_shell_residual(const Monodromy& t, const DualBetheVector& cv, cplx w) {
  const double n = bv_norm_guard(cv.costate);
  const cplx tau = eigenvalue_tau(w, cv.roots, t.space().params());
  return (apply_transfer_left(t, w, cv.costate, cv.roots.twist) - tau * cv.costate).norm() / n;
}

double composite_bv_residual(const FockSpace& space, const BetheRoots& roots, int m) {
  const double c = space.params().coupling;
  const double d = space.params().spacing;
  const Monodromy full(space);
  const auto [t1, t2] = composite_split(space, m);
  const BetheVector ref = build_bv(full, roots);
  State acc = State::Zero(ref.state.size());
  for (int ka = 0; ka <= roots.a(); ++ka)
    for (const auto& [ui, uii] : two_block_splits(roots.u, ka))
      for (int kb = ka; kb <= roots.b(); ++kb) {
        if (static_cast<int>(uii.size()) > roots.b() - kb) continue;
        for (const auto& [vi, vii] : two_block_splits(roots.v, kb)) {
          const cplx coef = ell3_prod(vii, d, m) * f_prod(uii, ui, c) * f_prod(vii, vi, c) / f_prod(vii, ui, c);
          BetheRoots r2;
          r2.u = uii;
          r2.v = vii;
          BetheRoots r1;
          r1.u = ui;
          r1.v = vi;
          const BetheVector b2 = build_bv(t2, r2);
          const BetheVector b1 = build_bv(t1, r1, &b2.state);
          acc += coef * b1.state;
        }
      }
  return relative_norm(acc, ref.state);
}

cplx norm_squared(const Monodromy& t, const BetheRoots& roots) {
  const BetheVector bv = build_bv(t, roots);
  const DualBetheVector cv = build_dual_bv(t, roots, true);
  const cplx n = bilinear(cv.costate, bv.state);
  if (std::abs(n) < 1e-300) throw Error(ErrorKind::validation, "C.B vanishes for these roots");
  return n;
}

State contour_limit(const std::function<State(cplx)>& fn, double radius, int points) {
  State acc;
  for (int k = 0; k < points; ++k) {
    const cplx s = std::polar(radius, two_pi * (k + 0.5) / points);
    State val = fn(s);
    if (k == 0)
      acc = std::move(val);
    else
      acc += val;
  }
  return acc / static_cast<double>(points);
}

double contour_radius(const std::vector<cplx>& singular, const ModelParams& p) {
  // L-operator poles sit at w = -2i/Delta, i.e. |s| = Delta/2.
  double r = 0.5 * p.spacing;
  for (const auto& w : singular)
    if (std::abs(w) > 0.0) r = std::min(r, 1.0 / std::abs(w));
  return 0.4 * r;
}

double relative_norm(const State& x, const State& ref) {
  const double n = ref.norm();
  return n > 0.0 ? (x - ref).norm() / n : x.norm();
}

std::vector<NamedResidual> zero_mode_action_check(const Monodromy& t, const ZeroModes& z,
                                                  const BetheRoots& roots) {
  const ModelParams& p = t.space().params();
  const double c = p.coupling;
  std::vector<cplx> sing;
  for (const auto* set : {&roots.u, &roots.v})
    for (const auto& x : *set)
      for (double shift : {-1.0, 0.0, 1.0}) sing.push_back(x + cplx(0.0, shift * c));
  const double radius = contour_radius(sing, p);
  const BetheVector bv = build_bv(t, roots);
  const double scale = bv_norm_guard(bv.state);
  std::vector<NamedResidual> out;

  const State z12b = z(1, 2) * bv.state;
  const State lim12 = contour_limit(
      [&](cplx s) {
        const cplx w = 1.0 / s;
        BetheRoots r = roots;
        r.u.insert(r.u.begin(), w);
        return State(z.kappa * (w / c) * build_bv(t, r).state);
      },
      radius);
  out.push_back({"Z12 B = lim kappa (w/c) B(a+1,b)", (z12b - lim12).norm() / scale});

  if (p.max_particles >= roots.b() + 2) {
    const State z23b = z(2, 3) * bv.state;
    const State lim23 = contour_limit(
        [&](cplx s) {
          const cplx w = 1.0 / s;
          BetheRoots r = roots;
          r.v.insert(r.v.begin(), w);
          return State(z.kappa * (w / c) / t.lambda3(w) * build_bv(t, r).state);
        },
        radius);
    out.push_back({"Z23 B = lim kappa (w/c) B(a,b+1) / lambda3(w)", (z23b - lim23).norm() / scale});
  }

  out.push_back({"Z21 B = 0", (z(2, 1) * bv.state).norm() / scale});
  out.push_back({"Z32 B = 0", (z(3, 2) * bv.state).norm() / scale});
  out.push_back({"Z31 B = 0", (z(3, 1) * bv.state).norm() / scale});
  const DualBetheVector cv = build_dual_bv(t, roots);
  const double cscale = bv_norm_guard(cv.costate);
  out.push_back({"C Z12 = 0", (z(1, 2).transpose() * cv.costate).norm() / cscale});
  out.push_back({"C Z23 = 0", (z(2, 3).transpose() * cv.costate).norm() / cscale});
  out.push_back({"C Z13 = 0", (z(1, 3).transpose() * cv.costate).norm() / cscale});
  return out;
}

}  // namespace bethe
