#pragma once

// Truncated two-component bosonic Fock space on a periodic lattice and the
// site-local operators of the lattice Bose gas.
//
// Basis states are occupation sequences (n1(1), n2(1), n1(2), n2(2), ...)
// with total particle number <= max_particles, sorted lexicographically.
// The vacuum is always index 0.

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bethe {

using cplx = std::complex<double>;
using Operator = Eigen::SparseMatrix<cplx>;
using State = Eigen::VectorXcd;

struct ModelParams {
  int sites = 3;           // M
  double spacing = 0.5;    // Delta
  double coupling = 1.0;   // c
  int max_particles = 4;   // total-number truncation

  double length() const { return sites * spacing; }

  // Throws Error(invalid_argument) on M < 1, Delta <= 0, c <= 0, N_max < 0.
  void validate() const;
  // Identities involving a sector with b particles need two spare shells.
  void require_sector(int b) const;
  void require_particles(int n) const;
};

enum class Component { one = 0, two = 1 };
enum class Ladder { annihilate, create };

using Occupation = std::vector<int>;

struct SiteDensities {
  Operator number1;
  Operator number2;
  Operator total;  // rho = N1 + N2
  Operator q;      // sqrt(c + c^2 Delta^2 rho / 4), diagonal
};

class FockSpace {
 public:
  static constexpr std::size_t default_dim_limit = 200000;

  explicit FockSpace(const ModelParams& params,
                     std::size_t dim_limit = default_dim_limit);

  const ModelParams& params() const { return params_; }
  std::size_t dim() const { return basis_.size(); }
  const Occupation& state(std::size_t i) const { return basis_[i]; }
  std::optional<std::size_t> index_of(const Occupation& occ) const;

  int total_particles(std::size_t i) const { return totals_[i]; }
  // States with total particle number <= max_particles - 2.
  bool is_safe(std::size_t i) const {
    return totals_[i] <= params_.max_particles - 2;
  }
  const std::vector<std::size_t>& safe_indices() const { return safe_; }

  State vacuum() const;
  Operator identity() const;

  Operator field(Ladder kind, Component comp, int site) const;
  Operator annihilate(Component comp, int site) const {
    return field(Ladder::annihilate, comp, site);
  }
  Operator create(Component comp, int site) const {
    return field(Ladder::create, comp, site);
  }
  SiteDensities densities(int site) const;
  // Sum over sites and components of the occupation numbers.
  Operator total_number() const;

 private:
  void check_site(int site) const;
  std::size_t slot(Component comp, int site) const {
    return 2 * static_cast<std::size_t>(site - 1) + static_cast<std::size_t>(comp);
  }

  ModelParams params_;
  std::vector<Occupation> basis_;
  std::vector<int> totals_;
  std::vector<std::size_t> safe_;
  std::map<Occupation, std::size_t> index_;
};

// binomial(n, k) as an exact integer; used for the stars-and-bars dimension.
std::size_t binomial(int n, int k);

// Dense block of `op` on the rows/columns listed in `idx`.
Eigen::MatrixXcd restrict_to(const Operator& op, const std::vector<std::size_t>& idx);
// x^T y, the pairing of a covector with a vector (no conjugation).
inline cplx bilinear(const State& x, const State& y) { return (x.transpose() * y)(0, 0); }

double max_abs_on(const Operator& op, const std::vector<std::size_t>& idx);

}  // namespace bethe
