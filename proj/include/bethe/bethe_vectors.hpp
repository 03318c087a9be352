#pragma once

// Bethe vectors B^{a,b}(u;v), dual vectors C^{a,b}(u;v) and the identities
// they satisfy: eigenvector property, composite factorization and the
// action of zero modes.

#include <functional>
#include <string>
#include <vector>

#include "bethe/kernel.hpp"
#include "bethe/monodromy.hpp"

namespace bethe {

// Ordered set partitions of `ground` into labeled blocks of sizes `profile`.
struct PartitionEnumerator {
  Roots ground;
  std::vector<int> profile;

  // Each entry holds one block per profile slot, in canonical
  // (lexicographic-by-index) order. Empty when the profile does not sum to
  // |ground|.
  std::vector<std::vector<Roots>> enumerate() const;
};

struct BetheVector {
  BetheRoots roots;
  State state;
  bool empty_sector = false;  // a > b: no admissible splitting
};

struct DualBetheVector {
  BetheRoots roots;
  State costate;
  std::string route = "mirror";
};

// sum over v_I (|v_I| = a): K_a(v_I|u) f(v_II,v_I)/f(v,u) T13(v_I) T23(v_II) start
BetheVector build_bv(const Monodromy& t, const BetheRoots& roots, const State* start = nullptr);
// Mirror formula <0| T32(v_II) T31(v_I> with the same coefficients. When
// `validate` is set and the roots are on-shell, the left-eigenvector
// residual is checked and the diagonalization route is used on failure.
DualBetheVector build_dual_bv(const Monodromy& t, const BetheRoots& roots, bool validate = false);

// ||t_beta(w) B - tau(w) B|| / ||B||
double on_shell_residual(const Monodromy& t, const BetheVector& bv, cplx w);
double dual_on_shell_residual(const Monodromy& t, const DualBetheVector& cv, cplx w);

// || sum over splits of the partial-chain vectors - B || / ||B||.
double composite_bv_residual(const FockSpace& space, const BetheRoots& roots, int m);

// C . B (bilinear, no conjugation)
cplx norm_squared(const Monodromy& t, const BetheRoots& roots);

// Value at s = 0 of a function analytic in |s| <= radius, as the mean over
// `points` equally spaced samples on the circle.
State contour_limit(const std::function<State(cplx)>& fn, double radius, int points = 64);
// Largest safe contour radius in s = 1/w for functions whose singularities
// sit at the given w-values and on the L-operator poles.
double contour_radius(const std::vector<cplx>& singular, const ModelParams& p);

struct NamedResidual {
  std::string name;
  double value;
};

// Z12 B^{a,b} = lim kappa (w/c) B^{a+1,b}({w,u};v),
// Z23 B^{a,b} = lim kappa (w/c) lambda3(w)^{-1} B^{a,b+1}(u;{w,v}),
// and the highest-weight annihilations.
std::vector<NamedResidual> zero_mode_action_check(const Monodromy& t, const ZeroModes& z,
                                                  const BetheRoots& roots);

double relative_norm(const State& x, const State& ref);

}  // namespace bethe
