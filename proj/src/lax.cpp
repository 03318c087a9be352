#include "bethe/lax.hpp"

#include <sstream>

#include "bethe/error.hpp"

namespace bethe {

AuxMatrix3 AuxMatrix3::zero(Eigen::Index dim) {
  AuxMatrix3 m;
  for (auto& e : m.entries) e = Operator(dim, dim);
  return m;
}

AuxMatrix3 AuxMatrix3::identity(Eigen::Index dim) {
  AuxMatrix3 m = zero(dim);
  for (int i = 1; i <= 3; ++i) m(i, i).setIdentity();
  return m;
}

AuxMatrix3 operator*(const AuxMatrix3& a, const AuxMatrix3& b) {
  const Eigen::Index dim = a.entries[0].rows();
  AuxMatrix3 out = AuxMatrix3::zero(dim);
  for (int i = 1; i <= 3; ++i)
    for (int k = 1; k <= 3; ++k) {
      Operator acc(dim, dim);
      for (int j = 1; j <= 3; ++j) {
        if (a(i, j).nonZeros() == 0 || b(j, k).nonZeros() == 0) continue;
        acc += Operator(a(i, j) * b(j, k));
      }
      acc.prune(cplx(0.0));
      out(i, k) = std::move(acc);
    }
  return out;
}

AuxMatrix3 operator+(const AuxMatrix3& a, const AuxMatrix3& b) {
  AuxMatrix3 out;
  for (std::size_t k = 0; k < 9; ++k) out.entries[k] = a.entries[k] + b.entries[k];
  return out;
}

AuxMatrix3 operator*(cplx s, const AuxMatrix3& a) {
  AuxMatrix3 out;
  for (std::size_t k = 0; k < 9; ++k) out.entries[k] = s * a.entries[k];
  return out;
}

Matrix9 permutation9() {
  Matrix9 p = Matrix9::Zero();
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) p(aux_pair(i, j), aux_pair(j, i)) = 1.0;
  return p;
}

Matrix9 build_R(cplx u, cplx v, double c) {
  if (std::abs(u - v) < pole_epsilon)
    throw Error(ErrorKind::pole, "R-matrix evaluated at coincident arguments");
  const cplx g = cplx(0.0, -c) / (u - v);
  return Matrix9::Identity() + g * permutation9();
}

double yang_baxter_residual(cplx u, cplx v, cplx w, double c) {
  const Matrix9 r12 = build_R(u, v, c);
  const Matrix9 r13raw = build_R(u, w, c);
  const Matrix9 r23raw = build_R(v, w, c);
  // Embed into the triple product with index (i, j, k) -> 9(i-1) + 3(j-1) + (k-1).
  Matrix27 a12 = Matrix27::Zero(), a13 = Matrix27::Zero(), a23 = Matrix27::Zero();
  auto idx = [](int i, int j, int k) { return 9 * i + 3 * j + k; };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 3; ++q) {
            a12(idx(i, j, k), idx(p, q, k)) = r12(3 * i + j, 3 * p + q);
            a13(idx(i, k, j), idx(p, k, q)) = r13raw(3 * i + j, 3 * p + q);
            a23(idx(k, i, j), idx(k, p, q)) = r23raw(3 * i + j, 3 * p + q);
          }
  const Matrix27 lhs = a12 * a13 * a23;
  const Matrix27 rhs = a23 * a13 * a12;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

cplx r0(cplx u, double spacing) {
  const cplx h = cplx(0.0, 0.5 * spacing) * u;
  return (1.0 + h) / (1.0 - h);
}

void check_lax_pole(cplx u, double spacing) {
  const cplx den = 1.0 - cplx(0.0, 0.5 * spacing) * u;
  if (std::abs(den) < pole_epsilon) {
    std::ostringstream os;
    os << "spectral parameter " << u << " sits on the L-operator pole -2i/Delta";
    throw Error(ErrorKind::pole, os.str());
  }
}

LaxCoefficients lax_coefficients(const FockSpace& space, int site) {
  const auto& p = space.params();
  const double c = p.coupling;
  const double d = p.spacing;
  const Eigen::Index n = static_cast<Eigen::Index>(space.dim());
  const Operator psi1 = space.annihilate(Component::one, site);
  const Operator psi2 = space.annihilate(Component::two, site);
  const Operator dag1 = space.create(Component::one, site);
  const Operator dag2 = space.create(Component::two, site);
  const SiteDensities dens = space.densities(site);
  const Operator id = space.identity();
  const double k = 0.5 * c * d * d;  // c Delta^2 / (2 - iu Delta) = k / (1 - iu Delta/2)
  const cplx mi_d(0.0, -d);
  const cplx i_d(0.0, d);

  LaxCoefficients lc{AuxMatrix3::zero(n), AuxMatrix3::zero(n)};
  auto& a = lc.constant;
  auto& b = lc.linear;
  a(1, 1) = id + k * dens.number1;
  a(1, 2) = k * Operator(dag1 * psi2);
  a(1, 3) = mi_d * Operator(dag1 * dens.q);
  a(2, 1) = k * Operator(dag2 * psi1);
  a(2, 2) = id + k * dens.number2;
  a(2, 3) = mi_d * Operator(dag2 * dens.q);
  a(3, 1) = i_d * Operator(dens.q * psi1);
  a(3, 2) = i_d * Operator(dens.q * psi2);
  a(3, 3) = id + k * dens.total;
  const cplx half(0.0, 0.5 * d);
  b(1, 1) = -half * id;
  b(2, 2) = -half * id;
  b(3, 3) = half * id;
  for (auto& e : a.entries) e.prune(cplx(0.0));
  return lc;
}

AuxMatrix3 build_L(const FockSpace& space, cplx u, int site) {
  const double d = space.params().spacing;
  check_lax_pole(u, d);
  const LaxCoefficients lc = lax_coefficients(space, site);
  const cplx inv = 1.0 / (1.0 - cplx(0.0, 0.5 * d) * u);
  return inv * (lc.constant + u * lc.linear);
}

double rtt_residual(const FockSpace& space, cplx u, cplx v, const MonodromyBuilder& builder) {
  const double c = space.params().coupling;
  const Matrix9 r = build_R(u, v, c);
  const AuxMatrix3 tu = builder(u);
  const AuxMatrix3 tv = builder(v);
  const auto& safe = space.safe_indices();
  // T1(u) T2(v) has entry ((a,b),(j,l)) = T_aj(u) T_bl(v); T2(v) T1(u) has
  // ((i,k),(a,b)) = T_kb(v) T_ia(u).
  std::array<Eigen::MatrixXcd, 81> t1t2, t2t1;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      for (int j = 1; j <= 3; ++j)
        for (int l = 1; l <= 3; ++l) {
          const auto pos = static_cast<std::size_t>(9 * aux_pair(a, b) + aux_pair(j, l));
          t1t2[pos] = restrict_to(Operator(tu(a, j) * tv(b, l)), safe);
          t2t1[pos] = restrict_to(Operator(tv(b, l) * tu(a, j)), safe);
        }
  double worst = 0.0;
  const auto ns = static_cast<Eigen::Index>(safe.size());
  for (int i = 1; i <= 3; ++i)
    for (int k = 1; k <= 3; ++k)
      for (int j = 1; j <= 3; ++j)
        for (int l = 1; l <= 3; ++l) {
          Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(ns, ns);
          for (int a = 1; a <= 3; ++a)
            for (int b = 1; b <= 3; ++b) {
              const cplx left = r(aux_pair(i, k), aux_pair(a, b));
              if (left != 0.0) acc += left * t1t2[static_cast<std::size_t>(9 * aux_pair(a, b) + aux_pair(j, l))];
              // (T2 T1)_{(i,k),(a,b)} = T_kb(v) T_ia(u)
              const cplx right = r(aux_pair(a, b), aux_pair(j, l));
              if (right != 0.0) acc -= right * t2t1[static_cast<std::size_t>(9 * aux_pair(i, k) + aux_pair(a, b))];
            }
          if (ns > 0) worst = std::max(worst, acc.cwiseAbs().maxCoeff());
        }
  return worst;
}

}  // namespace bethe
