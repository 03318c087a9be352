#pragma once

// Scalar layer: rational functions g and f, vacuum ratios, the Izergin
// determinant, twisted Bethe equations, the Newton solver and the
// transfer-matrix eigenvalue.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bethe/fock.hpp"
#include "bethe/twist.hpp"

namespace bethe {

using Roots = std::vector<cplx>;

cplx g_fn(cplx x, cplx y, double c);
cplx f_fn(cplx x, cplx y, double c);
// h = f/g
cplx h_fn(cplx x, cplx y, double c);
// prod over x in xs, y in ys of f(x, y); empty products are 1.
cplx f_prod(const Roots& xs, const Roots& ys, double c);

// r3(u) = lambda3(u)/lambda2(u) = r0(u)^M; ell3 on an m-site sub-chain.
cplx r3_fn(cplx u, const ModelParams& p);
cplx ell3_fn(cplx u, double spacing, int m);
cplx ell3_prod(const Roots& vs, double spacing, int m);

cplx izergin(const Roots& x, const Roots& y, double c);

struct BetheRoots {
  Roots u;
  Roots v;
  Twist twist;
  double residual = -1.0;  // cleared residual norm; negative when not evaluated

  int a() const { return static_cast<int>(u.size()); }
  int b() const { return static_cast<int>(v.size()); }
  // Flattened (u_1..u_a, v_1..v_b).
  Eigen::VectorXcd flat() const;
  static BetheRoots from_flat(const Eigen::VectorXcd& z, int a, const Twist& twist);
};

inline constexpr double tol_onshell_default = 1e-10;
inline constexpr double root_separation = 1e-8;

// Pole-free residuals, one per root, ordered as flat():
//   u_j: e^{b1} prod F(u_k,u_j) prod (v_l - u_j)
//        - e^{b2} (-1)^{a-1} prod F(u_j,u_k) prod F(v_l,u_j)
//   v_k: e^{b3} (1 + i v_k D/2)^M prod F(v_k,v_l) prod (v_k - u_j)
//        - e^{b2} (1 - i v_k D/2)^M (-1)^{b-1} prod F(v_l,v_k) prod F(v_k,u_j)
// with F(x, y) = x - y - ic.
Eigen::VectorXcd bethe_residual(const BetheRoots& roots, const ModelParams& p);
// d residual / d roots
Eigen::MatrixXcd bethe_jacobian(const BetheRoots& roots, const ModelParams& p);
// d residual / d beta_j, columns j = 1..3
Eigen::MatrixXcd bethe_twist_gradient(const BetheRoots& roots, const ModelParams& p);

void check_roots(const BetheRoots& roots, const ModelParams& p);

struct SolverOptions {
  double tol = tol_onshell_default;
  int max_iter = 200;
  int restarts = 5;
  std::uint64_t seed = 0;
};

BetheRoots solve_bethe(const BetheRoots& seed, const ModelParams& p,
                       const SolverOptions& opts = {});

// tau_beta(w) = e^{b1} f(u,w) + e^{b2} f(w,u) f(v,w) + e^{b3} lambda3(w) f(w,v)
cplx eigenvalue_tau(cplx w, const BetheRoots& roots, const ModelParams& p);

// Columns j = 1..3 hold d(roots)/d(beta_j) at the roots' twist.
Eigen::MatrixXcd root_twist_derivative(const BetheRoots& roots, const ModelParams& p);
Eigen::MatrixXcd root_twist_derivative_fd(const BetheRoots& roots, const ModelParams& p,
                                          double h, const SolverOptions& opts = {});

// v = -(2/Delta) tan(pi k / M), k = 0..M-1, the untwisted (0,1) family.
Roots closed_form_01(const ModelParams& p);
// Deterministic seed list for sector (a, b).
std::vector<BetheRoots> sector_seeds(int a, int b, const ModelParams& p, const Twist& twist = {});
// Up to `count` distinct solutions found from sector_seeds, in seed order.
std::vector<BetheRoots> find_solutions(int a, int b, const ModelParams& p, int count,
                                       const Twist& twist = {}, const SolverOptions& opts = {});
// True if the two root sets agree up to permutation within each set.
bool same_roots(const BetheRoots& x, const BetheRoots& y, double tol = 1e-7);

}  // namespace bethe
