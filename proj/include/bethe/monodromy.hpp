#pragma once

// Monodromy matrices of the full chain and of sub-chains, their exact
// rational representation in u, transfer matrices and zero modes.

#include <utility>
#include <vector>

#include "bethe/lax.hpp"
#include "bethe/twist.hpp"

namespace bethe {

// Consecutive sites first..last (1-based, inclusive).
struct SiteRange {
  int first = 1;
  int last = 1;
  int size() const { return last - first + 1; }
};

// T(u) = sum_k u^k N_k / (1 - iu Delta/2)^n for an n-site product.
class OperatorRationalFunction {
 public:
  OperatorRationalFunction(std::vector<AuxMatrix3> numerator, int sites, double spacing)
      : numerator_(std::move(numerator)), sites_(sites), spacing_(spacing) {}

  const std::vector<AuxMatrix3>& numerator() const { return numerator_; }
  int degree() const { return static_cast<int>(numerator_.size()) - 1; }
  int sites() const { return sites_; }

  cplx denominator(cplx u) const;
  AuxMatrix3 evaluate(cplx u) const;
  // Coefficients t_0..t_order of T = sum_j t_j s^j around s = 1/u = 0.
  std::vector<AuxMatrix3> expansion_at_infinity(int order) const;

 private:
  std::vector<AuxMatrix3> numerator_;
  int sites_;
  double spacing_;
};

class Monodromy {
 public:
  Monodromy(const FockSpace& space, SiteRange range);
  explicit Monodromy(const FockSpace& space);

  const FockSpace& space() const { return *space_; }
  SiteRange range() const { return range_; }
  const OperatorRationalFunction& rational() const { return rational_; }

  AuxMatrix3 at(cplx u) const { return rational_.evaluate(u); }
  Operator entry(int i, int j, cplx u) const;
  // Direct ordered product L(u|last)...L(u|first).
  AuxMatrix3 product_at(cplx u) const;

  // T_ij(u) x and x^T T_ij(u) (transpose, no conjugation).
  State apply(int i, int j, cplx u, const State& x) const;
  State apply_left(int i, int j, cplx u, const State& x) const;

  // Vacuum eigenvalues: lambda_1 = lambda_2 = 1, lambda_3 = r0(u)^n.
  cplx lambda3(cplx u) const;

 private:
  const FockSpace* space_;
  SiteRange range_;
  OperatorRationalFunction rational_;
};

OperatorRationalFunction build_monodromy_rational(const FockSpace& space, SiteRange range);
AuxMatrix3 build_monodromy(const FockSpace& space, cplx u);

// t_beta(u) = sum_j e^{beta_j} T_jj(u).
Operator transfer(const AuxMatrix3& t, const Twist& twist = {});
State apply_transfer(const Monodromy& t, cplx u, const State& x, const Twist& twist = {});
State apply_transfer_left(const Monodromy& t, cplx u, const State& x, const Twist& twist = {});

// T = T2 T1 with T1 on sites 1..m and T2 on sites m+1..M.
std::pair<Monodromy, Monodromy> composite_split(const FockSpace& space, int m);

struct ZeroModes {
  // modes(i, j) = kappa * lim u (T_ij(u)/G_jj - delta_ij) / c
  AuxMatrix3 modes;
  // T(infinity) = diag(g1, g2, g3) * identity
  std::array<double, 3> g{1.0, 1.0, 1.0};
  cplx kappa{0.0, 1.0};

  const Operator& operator()(int i, int j) const { return modes(i, j); }
  // <0| T_jj[0] |0>
  cplx vacuum_value(int j) const;
};

ZeroModes zero_modes(const OperatorRationalFunction& t, double coupling, cplx kappa);

struct NormalizationFit {
  cplx kappa;
  double residual;  // bracket residual after the fit
};
// Least-squares fit of kappa in kappa [R_ij, R_kl] = delta_il R_kj - delta_jk R_il
// on a one-site chain with the given spacing, coupling and truncation.
NormalizationFit measure_zero_mode_normalization(const ModelParams& params);

Operator commutator(const Operator& a, const Operator& b);

}  // namespace bethe
