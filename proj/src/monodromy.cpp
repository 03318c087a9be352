#include "bethe/monodromy.hpp"

#include <sstream>

#include "bethe/error.hpp"

namespace bethe {

namespace {

void check_range(const FockSpace& space, SiteRange r) {
  if (r.first < 1 || r.last > space.params().sites || r.first > r.last) {
    std::ostringstream os;
    os << "site range " << r.first << ".." << r.last << " outside 1.." << space.params().sites;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
}


}  // namespace

cplx OperatorRationalFunction::denominator(cplx u) const {
  return std::pow(1.0 - cplx(0.0, 0.5 * spacing_) * u, sites_);
}

AuxMatrix3 OperatorRationalFunction::evaluate(cplx u) const {
  check_lax_pole(u, spacing_);
  const Eigen::Index dim = numerator_.front().entries[0].rows();
  AuxMatrix3 out = AuxMatrix3::zero(dim);
  const cplx inv = 1.0 / denominator(u);
  for (std::size_t e = 0; e < 9; ++e) {
    Operator acc = numerator_.back().entries[e];
    for (int k = degree() - 1; k >= 0; --k) acc = u * acc + numerator_[static_cast<std::size_t>(k)].entries[e];
    out.entries[e] = inv * acc;
  }
  return out;
}

std::vector<AuxMatrix3> OperatorRationalFunction::expansion_at_infinity(int order) const {
  // With s = 1/u: T = sum_j Ntilde_j s^j / dtilde(s), Ntilde_j = N_{n-j},
  // dtilde(s) = (s - i Delta/2)^n.
  const int n = sites_;
  const Eigen::Index dim = numerator_.front().entries[0].rows();
  std::vector<cplx> dt(static_cast<std::size_t>(n + 1));
  const cplx h(0.0, -0.5 * spacing_);
  for (int j = 0; j <= n; ++j) dt[static_cast<std::size_t>(j)] = static_cast<double>(binomial(n, j)) * std::pow(h, n - j);
  auto ntilde = [&](int j) -> AuxMatrix3 {
    const int k = n - j;
    if (k < 0 || k > degree()) return AuxMatrix3::zero(dim);
    return numerator_[static_cast<std::size_t>(k)];
  };
  std::vector<AuxMatrix3> t;
  for (int j = 0; j <= order; ++j) {
    AuxMatrix3 acc = ntilde(j);
    for (int l = 1; l <= std::min(j, n); ++l)
      acc = acc + (-dt[static_cast<std::size_t>(l)]) * t[static_cast<std::size_t>(j - l)];
    t.push_back((1.0 / dt[0]) * acc);
  }
  return t;
}

OperatorRationalFunction build_monodromy_rational(const FockSpace& space, SiteRange range) {
  check_range(space, range);
  const auto dim = static_cast<Eigen::Index>(space.dim());
  std::vector<AuxMatrix3> num{AuxMatrix3::identity(dim)};
  for (int site = range.first; site <= range.last; ++site) {
    const LaxCoefficients lc = lax_coefficients(space, site);
    std::vector<AuxMatrix3> next(num.size() + 1, AuxMatrix3::zero(dim));
    for (std::size_t k = 0; k < num.size(); ++k) {
      next[k] = next[k] + lc.constant * num[k];
      next[k + 1] = next[k + 1] + lc.linear * num[k];
    }
    num = std::move(next);
  }
  return OperatorRationalFunction(std::move(num), range.size(), space.params().spacing);
}

AuxMatrix3 build_monodromy(const FockSpace& space, cplx u) {
  return Monodromy(space).product_at(u);
}

Monodromy::Monodromy(const FockSpace& space, SiteRange range)
    : space_(&space), range_(range), rational_(build_monodromy_rational(space, range)) {}

Monodromy::Monodromy(const FockSpace& space)
    : Monodromy(space, SiteRange{1, space.params().sites}) {}

Operator Monodromy::entry(int i, int j, cplx u) const {
  check_lax_pole(u, space_->params().spacing);
  const auto& num = rational_.numerator();
  Operator acc = num.back()(i, j);
  for (int k = rational_.degree() - 1; k >= 0; --k) acc = u * acc + num[static_cast<std::size_t>(k)](i, j);
  return (1.0 / rational_.denominator(u)) * acc;
}

AuxMatrix3 Monodromy::product_at(cplx u) const {
  AuxMatrix3 t = build_L(*space_, u, range_.first);
  for (int site = range_.first + 1; site <= range_.last; ++site) t = build_L(*space_, u, site) * t;
  return t;
}

State Monodromy::apply(int i, int j, cplx u, const State& x) const {
  check_lax_pole(u, space_->params().spacing);
  const auto& num = rational_.numerator();
  State acc = State::Zero(x.size());
  for (int k = rational_.degree(); k >= 0; --k) acc = u * acc + num[static_cast<std::size_t>(k)](i, j) * x;
  return acc / rational_.denominator(u);
}

State Monodromy::apply_left(int i, int j, cplx u, const State& x) const {
  check_lax_pole(u, space_->params().spacing);
  const auto& num = rational_.numerator();
  State acc = State::Zero(x.size());
  for (int k = rational_.degree(); k >= 0; --k)
    acc = u * acc + num[static_cast<std::size_t>(k)](i, j).transpose() * x;
  return acc / rational_.denominator(u);
}

cplx Monodromy::lambda3(cplx u) const {
  return std::pow(r0(u, space_->params().spacing), range_.size());
}

Operator transfer(const AuxMatrix3& t, const Twist& twist) {
  Operator out = twist.weight(1) * t(1, 1);
  out += twist.weight(2) * t(2, 2);
  out += twist.weight(3) * t(3, 3);
  return out;
}

State apply_transfer(const Monodromy& t, cplx u, const State& x, const Twist& twist) {
  State out = twist.weight(1) * t.apply(1, 1, u, x);
  out += twist.weight(2) * t.apply(2, 2, u, x);
  out += twist.weight(3) * t.apply(3, 3, u, x);
  return out;
}

State apply_transfer_left(const Monodromy& t, cplx u, const State& x, const Twist& twist) {
  State out = twist.weight(1) * t.apply_left(1, 1, u, x);
  out += twist.weight(2) * t.apply_left(2, 2, u, x);
  out += twist.weight(3) * t.apply_left(3, 3, u, x);
  return out;
}

std::pair<Monodromy, Monodromy> composite_split(const FockSpace& space, int m) {
  const int sites = space.params().sites;
  if (m < 1 || m >= sites) {
    std::ostringstream os;
    os << "cut m = " << m << " outside 1.." << sites - 1;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  return {Monodromy(space, SiteRange{1, m}), Monodromy(space, SiteRange{m + 1, sites})};
}

cplx ZeroModes::vacuum_value(int j) const {
  const Operator& z = modes(j, j);
  return z.coeff(0, 0);
}

ZeroModes zero_modes(const OperatorRationalFunction& t, double coupling, cplx kappa) {
  const auto coeffs = t.expansion_at_infinity(1);
  const AuxMatrix3& t0 = coeffs[0];
  const Eigen::Index dim = t0.entries[0].rows();
  ZeroModes z;
  z.kappa = kappa;
  const double expected_g3 = (t.sites() % 2 == 0) ? 1.0 : -1.0;
  z.g = {1.0, 1.0, expected_g3};
  // T(infinity) must be the scalar matrix diag(g); otherwise the limit does not exist.
  const Operator id = [&] { Operator i(dim, dim); i.setIdentity(); return i; }();
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      Operator dev = t0(i, j);
      if (i == j) dev -= z.g[static_cast<std::size_t>(i - 1)] * id;
      double worst = 0.0;
      for (int k = 0; k < dev.outerSize(); ++k)
        for (Operator::InnerIterator it(dev, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
      if (worst > 1e-9) {
        std::ostringstream os;
        os << "T(u) at u = infinity is not scalar in entry (" << i << "," << j << "), deviation " << worst;
        throw Error(ErrorKind::limit, os.str());
      }
    }
  const AuxMatrix3& t1 = coeffs[1];
  z.modes = AuxMatrix3::zero(dim);
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      z.modes(i, j) = (kappa / (coupling * z.g[static_cast<std::size_t>(j - 1)])) * t1(i, j);
      z.modes(i, j).prune(cplx(0.0), 1e-14);
    }
  return z;
}

Operator commutator(const Operator& a, const Operator& b) {
  Operator out = a * b;
  out -= Operator(b * a);
  return out;
}

NormalizationFit measure_zero_mode_normalization(const ModelParams& params) {
  ModelParams one = params;
  one.sites = 1;
  const FockSpace space(one);
  const ZeroModes raw = zero_modes(build_monodromy_rational(space, SiteRange{1, 1}), one.coupling, 1.0);
  const auto& safe = space.safe_indices();
  // kappa * A = B in the least-squares sense, stacked over all 81 brackets.
  cplx num = 0.0;
  double den = 0.0;
  std::vector<std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd>> blocks;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      for (int k = 1; k <= 3; ++k)
        for (int l = 1; l <= 3; ++l) {
          Eigen::MatrixXcd a = restrict_to(commutator(raw(i, j), raw(k, l)), safe);
          Operator rhs(static_cast<Eigen::Index>(space.dim()), static_cast<Eigen::Index>(space.dim()));
          if (i == l) rhs += raw(k, j);
          if (j == k) rhs -= raw(i, l);
          Eigen::MatrixXcd b = restrict_to(rhs, safe);
          num += (a.adjoint() * b).trace();
          den += a.squaredNorm();
          blocks.emplace_back(std::move(a), std::move(b));
        }
  if (den == 0.0) throw Error(ErrorKind::singular, "zero-mode brackets vanish identically");
  NormalizationFit fit{num / den, 0.0};
  for (const auto& [a, b] : blocks) fit.residual = std::max(fit.residual, (fit.kappa * a - b).cwiseAbs().maxCoeff());
  return fit;
}

}  // namespace bethe
