#pragma once

// GL(3)-invariant rational R-matrix and the lattice L-operator of the
// two-component Bose gas.
//
// Auxiliary-space convention used everywhere: indices i, j run over 1..3,
// and on C^3 (x) C^3 the pair (i, j) maps to row 3*(i-1) + (j-1).

#include <array>
#include <functional>

#include "bethe/fock.hpp"

namespace bethe {

inline constexpr double pole_epsilon = 1e-12;

// 3x3 auxiliary matrix with operator entries, 1-based access.
struct AuxMatrix3 {
  std::array<Operator, 9> entries;

  Operator& operator()(int i, int j) { return entries[static_cast<std::size_t>(3 * (i - 1) + (j - 1))]; }
  const Operator& operator()(int i, int j) const {
    return entries[static_cast<std::size_t>(3 * (i - 1) + (j - 1))];
  }

  static AuxMatrix3 zero(Eigen::Index dim);
  static AuxMatrix3 identity(Eigen::Index dim);
};

AuxMatrix3 operator*(const AuxMatrix3& a, const AuxMatrix3& b);
AuxMatrix3 operator+(const AuxMatrix3& a, const AuxMatrix3& b);
AuxMatrix3 operator*(cplx s, const AuxMatrix3& a);

using Matrix9 = Eigen::Matrix<cplx, 9, 9>;
using Matrix27 = Eigen::Matrix<cplx, 27, 27>;

inline int aux_pair(int i, int j) { return 3 * (i - 1) + (j - 1); }

Matrix9 permutation9();
// R(u, v) = I + g(u, v) P with g(u, v) = -ic/(u - v).
Matrix9 build_R(cplx u, cplx v, double c);
// Yang-Baxter residual max|R12 R13 R23 - R23 R13 R12| on C^3 (x) C^3 (x) C^3.
double yang_baxter_residual(cplx u, cplx v, cplx w, double c);

// r0(u) = (1 + iu Delta/2) / (1 - iu Delta/2).
cplx r0(cplx u, double spacing);

AuxMatrix3 build_L(const FockSpace& space, cplx u, int site);

// Numerator coefficients of L(u|n) = (A + u B) / (1 - iu Delta/2).
struct LaxCoefficients {
  AuxMatrix3 constant;
  AuxMatrix3 linear;
};
LaxCoefficients lax_coefficients(const FockSpace& space, int site);

using MonodromyBuilder = std::function<AuxMatrix3(cplx)>;

// max-norm of R12 T1(u) T2(v) - T2(v) T1(u) R12 restricted to the safe subspace.
double rtt_residual(const FockSpace& space, cplx u, cplx v, const MonodromyBuilder& builder);

void check_lax_pole(cplx u, double spacing);

}  // namespace bethe
