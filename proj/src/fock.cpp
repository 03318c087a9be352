#include "bethe/fock.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "bethe/error.hpp"

namespace bethe {

void ModelParams::validate() const {
  if (sites < 1) throw Error(ErrorKind::invalid_argument, "sites must be >= 1");
  if (!(spacing > 0.0)) throw Error(ErrorKind::invalid_argument, "spacing must be > 0");
  if (!(coupling > 0.0)) throw Error(ErrorKind::invalid_argument, "coupling must be > 0");
  if (max_particles < 0) throw Error(ErrorKind::invalid_argument, "max_particles must be >= 0");
}

void ModelParams::require_particles(int n) const {
  if (max_particles < n) {
    std::ostringstream os;
    os << "need max_particles >= " << n << " (have " << max_particles << ")";
    throw Error(ErrorKind::sector, os.str());
  }
}

void ModelParams::require_sector(int b) const { require_particles(b + 2); }

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

namespace {

void enumerate(std::size_t slot, int budget, Occupation& cur, std::vector<Occupation>& out) {
  if (slot == cur.size()) {
    out.push_back(cur);
    return;
  }
  for (int n = 0; n <= budget; ++n) {
    cur[slot] = n;
    enumerate(slot + 1, budget - n, cur, out);
  }
  cur[slot] = 0;
}

}  // namespace

FockSpace::FockSpace(const ModelParams& params, std::size_t dim_limit) : params_(params) {
  params_.validate();
  const int modes = 2 * params_.sites;
  const std::size_t expected = binomial(params_.max_particles + modes, modes);
  if (expected > dim_limit) {
    std::ostringstream os;
    os << "Fock space dimension " << expected << " exceeds bound " << dim_limit;
    throw Error(ErrorKind::dimension, os.str());
  }
  basis_.reserve(expected);
  Occupation cur(static_cast<std::size_t>(modes), 0);
  enumerate(0, params_.max_particles, cur, basis_);
  totals_.reserve(basis_.size());
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    const int t = std::accumulate(basis_[i].begin(), basis_[i].end(), 0);
    totals_.push_back(t);
    index_.emplace(basis_[i], i);
    if (t <= params_.max_particles - 2) safe_.push_back(i);
  }
}

std::optional<std::size_t> FockSpace::index_of(const Occupation& occ) const {
  auto it = index_.find(occ);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

State FockSpace::vacuum() const {
  State v = State::Zero(static_cast<Eigen::Index>(dim()));
  v(0) = 1.0;
  return v;
}

Operator FockSpace::identity() const {
  Operator id(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
  id.setIdentity();
  return id;
}

void FockSpace::check_site(int site) const {
  if (site < 1 || site > params_.sites) {
    std::ostringstream os;
    os << "site " << site << " outside 1.." << params_.sites;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
}

Operator FockSpace::field(Ladder kind, Component comp, int site) const {
  check_site(site);
  const std::size_t k = slot(comp, site);
  const double scale = 1.0 / std::sqrt(params_.spacing);
  std::vector<Eigen::Triplet<cplx>> trips;
  // annihilation: |n> -> sqrt(n) |n-1>; creation is its transpose, and any
  // image outside the truncated space is dropped.
  for (std::size_t i = 0; i < dim(); ++i) {
    const int n = basis_[i][k];
    if (n == 0) continue;
    Occupation lowered = basis_[i];
    lowered[k] -= 1;
    const std::size_t j = index_.at(lowered);
    const double amp = std::sqrt(static_cast<double>(n)) * scale;
    if (kind == Ladder::annihilate)
      trips.emplace_back(static_cast<int>(j), static_cast<int>(i), amp);
    else
      trips.emplace_back(static_cast<int>(i), static_cast<int>(j), amp);
  }
  Operator op(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

SiteDensities FockSpace::densities(int site) const {
  check_site(site);
  const double c = params_.coupling;
  const double d = params_.spacing;
  std::vector<Eigen::Triplet<cplx>> n1, n2, rho, q;
  for (std::size_t i = 0; i < dim(); ++i) {
    const int a = basis_[i][slot(Component::one, site)];
    const int b = basis_[i][slot(Component::two, site)];
    const int idx = static_cast<int>(i);
    // N_j = psi_j^dag psi_j = n_j / Delta
    if (a) n1.emplace_back(idx, idx, a / d);
    if (b) n2.emplace_back(idx, idx, b / d);
    if (a + b) rho.emplace_back(idx, idx, (a + b) / d);
    q.emplace_back(idx, idx, std::sqrt(c + c * c * d * d * ((a + b) / d) / 4.0));
  }
  const auto n = static_cast<Eigen::Index>(dim());
  SiteDensities out{Operator(n, n), Operator(n, n), Operator(n, n), Operator(n, n)};
  out.number1.setFromTriplets(n1.begin(), n1.end());
  out.number2.setFromTriplets(n2.begin(), n2.end());
  out.total.setFromTriplets(rho.begin(), rho.end());
  out.q.setFromTriplets(q.begin(), q.end());
  return out;
}

Operator FockSpace::total_number() const {
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::size_t i = 0; i < dim(); ++i)
    if (totals_[i]) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), double(totals_[i]));
  Operator op(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

Eigen::MatrixXcd restrict_to(const Operator& op, const std::vector<std::size_t>& idx) {
  std::vector<Eigen::Index> pos(static_cast<std::size_t>(op.rows()), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) pos[idx[k]] = static_cast<Eigen::Index>(k);
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index col = 0; col < op.outerSize(); ++col) {
    const Eigen::Index cj = pos[static_cast<std::size_t>(col)];
    if (cj < 0) continue;
    for (Operator::InnerIterator it(op, col); it; ++it) {
      const Eigen::Index ri = pos[static_cast<std::size_t>(it.row())];
      if (ri >= 0) out(ri, cj) += it.value();
    }
  }
  return out;
}

double max_abs_on(const Operator& op, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  return restrict_to(op, idx).cwiseAbs().maxCoeff();
}

}  // namespace bethe
