#pragma once

// Delta -> 0 comparison of lattice quantities with their continuum values
// at fixed length L and coupling c.

#include <string>
#include <vector>

#include "bethe/form_factors.hpp"

namespace bethe {

struct RichardsonResult {
  cplx extrapolated{};
  double rate = 0.0;  // log2 |q0 - q1| / |q1 - q2|
};

// Full Richardson table in h^2 for a sequence at h, h/2, h/4, ...
RichardsonResult richardson(const std::vector<cplx>& values);

struct ContinuumSettings {
  double length = 1.0;
  double coupling = 1.0;
  std::vector<int> divisions{4, 8, 16};  // M = L / Delta
  double x_fraction = 0.25;              // x = x_fraction * L
  cplx u{1.0, 0.0};                      // spectral parameter for lambda3
  int max_particles = 2;
};

struct ContinuumSeries {
  std::string name;
  std::vector<double> spacings;
  std::vector<cplx> lattice;
  cplx continuum{};
  cplx extrapolated{};
  double relative_error = 0.0;
  double rate = 0.0;
};

std::vector<ContinuumSeries> continuum_limit_check(const ContinuumSettings& settings);

}  // namespace bethe
