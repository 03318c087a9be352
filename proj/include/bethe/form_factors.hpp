#pragma once

// Form factors between on-shell Bethe states: global (transfer-matrix
// entries), local (zero modes of a sub-chain), twisted scalar products,
// the generating functional and the lattice form of the local-operator
// identities.

#include <string>
#include <vector>

#include "bethe/bethe_vectors.hpp"

namespace bethe {

struct OnShellState {
  BetheRoots roots;
  BetheVector bv;
  DualBetheVector cv;
};

OnShellState make_state(const Monodromy& t, const BetheRoots& roots);

struct FormFactorRecord {
  std::string kind;  // "global", "local", "site"
  int i = 0;
  int j = 0;
  int m = 0;
  BetheRoots bra;
  BetheRoots ket;
  cplx value{};           // first sample for global, the matrix element otherwise
  cplx tau_difference{};  // at the first z sample
  cplx universal{};       // mean of value(z) / (tau_C(z) - tau_B(z))
  double spread = 0.0;    // max |F(z) - mean| / |mean| over the samples
  cplx ell_ratio{1.0, 0.0};
  cplx momentum{};        // sum v^B - sum v^C
};

std::vector<cplx> default_z_samples();

cplx momentum(const BetheRoots& ket, const BetheRoots& bra);
// ell1(u^C) ell3(v^B) / (ell1(u^B) ell3(v^C)) on an m-site sub-chain; ell1 = 1.
cplx ell_ratio(const BetheRoots& ket, const BetheRoots& bra, double spacing, int m);

FormFactorRecord global_ff(const Monodromy& t, const OnShellState& bra, const OnShellState& ket,
                           int i, int j, const std::vector<cplx>& zs);

// Zero modes of the sub-chain 1..m (m = M gives the full chain).
ZeroModes local_zero_modes(const FockSpace& space, int m, cplx kappa);

FormFactorRecord local_ff(const ZeroModes& local, int m, const OnShellState& bra,
                          const OnShellState& ket, int i, int j);

// C(twisted roots) . B(plain roots)
cplx twisted_scalar_product(const Monodromy& t, const BetheRoots& twisted_bra, const BetheRoots& ket);

// |lhs - rhs| / max(|lhs|, |rhs|), falling back to |lhs - rhs| / scale when
// both sides are below 1e-12 scale.
double scaled_error(cplx lhs, cplx rhs, double scale);

struct DiagonalEntry {
  int index = 0;
  cplx lhs{};
  cplx rhs_fd{};
  cplx rhs_implicit{};
  double error_fd = 0.0;
  double error_implicit = 0.0;
  double fd_vs_implicit = 0.0;
};

struct GeneratingFunctionalReport {
  cplx g_lhs{};
  cplx g_rhs{};
  double g_error = 0.0;
  cplx ell_vacuum1{};
  cplx ell_vacuum3{};
  std::vector<DiagonalEntry> diagonal;
};

// G = C_beta exp(sum beta_j Z1_jj) B versus
// e^{beta_1 ell1[0] + beta_3 ell3[0]} ell-ratio S_beta, then the derivative
// identities at beta = 0 by central differences and by implicit root
// derivatives. For bra = ket the diagonal form
//   C Z1_jj B = (delta_j1 ell1[0] + delta_j3 ell3[0] - sum_k d log ell3(v_k) dv_k/dbeta_j) ||B||^2
// is used; otherwise C Z1_ii B = (ell-ratio - 1) dS/dbeta_i.
GeneratingFunctionalReport generating_functional_check(const Monodromy& t, const ZeroModes& local, int m,
                                                       const BetheRoots& bra, const BetheRoots& ket,
                                                       const Twist& twist, double fd_step = 1e-5,
                                                       const SolverOptions& opts = {});

// lim kappa (w/c) F^{(2,2)}(C, B^{a+1,b}({w,u};v)) = F^{(1,2)}(C, B). Returns
// the relative deviation.
double worked_zero_mode_identity(const Monodromy& t, cplx kappa, const OnShellState& bra,
                                 const OnShellState& ket, const std::vector<cplx>& zs);

// C Z1_ij(m) B against (ell-ratio - 1) F_universal.
NamedResidual local_operator_identity(const ZeroModes& local, int m, double spacing, const OnShellState& bra,
                                      const OnShellState& ket, const FormFactorRecord& global);

// Site-resolved forms with rho the one-site ell-ratio:
//   C Q psi_k(n) B     = (ic/2)(1 + 1/rho) rho^n F^{(3,k)}
//   C psi^dag_k Q(n) B = (ic/2)(1 + 1/rho) rho^n F^{(k,3)}
//   C psi^dag_i psi_j(n) B = -(rho^n - rho^{n-1}) F^{(i,j)} / Delta
std::vector<NamedResidual> site_identities(const Monodromy& t, const OnShellState& bra,
                                           const OnShellState& ket, int i, int j,
                                           const std::vector<cplx>& zs);

}  // namespace bethe
