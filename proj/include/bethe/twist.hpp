#pragma once

#include <array>
#include <complex>

namespace bethe {

// diag(e^{beta_1}, e^{beta_2}, e^{beta_3}); beta = 0 is the untwisted model.
struct Twist {
  std::array<std::complex<double>, 3> beta{};

  std::complex<double> weight(int j) const { return std::exp(beta[static_cast<std::size_t>(j - 1)]); }
  bool is_zero() const { return beta[0] == 0.0 && beta[1] == 0.0 && beta[2] == 0.0; }
  static Twist along(int j, std::complex<double> t) {
    Twist tw;
    tw.beta[static_cast<std::size_t>(j - 1)] = t;
    return tw;
  }
};

}  // namespace bethe
