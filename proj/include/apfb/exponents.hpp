#pragma once

#include <stdexcept>

namespace apfb {

// The exponent triple of the one-phase problem. For potential power
// gamma in [0,2) the solution grows like d^beta off the free boundary,
// with beta = 2/(2-gamma), and the transformed problem carries the
// degenerate weight v^alpha with alpha = gamma*beta = 2*beta - 2.
struct Exponents {
  double gamma = 0.0;
  double beta = 1.0;
  double alpha = 0.0;
  int n = 1;  // ambient dimension
};

// Throws std::domain_error unless 0 <= gamma < 2 and n >= 1.
Exponents derive_exponents(double gamma, int n);

// Inverse parametrization: gamma = 2*alpha/(alpha + 2), alpha >= 0.
Exponents exponents_from_alpha(double alpha, int n);

}  // namespace apfb
