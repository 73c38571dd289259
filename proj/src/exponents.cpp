#include "apfb/exponents.hpp"

#include <string>

namespace apfb {

Exponents derive_exponents(double gamma, int n) {
  if (!(gamma >= 0.0 && gamma < 2.0))
    throw std::domain_error("derive_exponents: gamma must lie in [0,2), got " +
                            std::to_string(gamma));
  if (n < 1) throw std::domain_error("derive_exponents: dimension must be >= 1");
  Exponents e;
  e.gamma = gamma;
  e.beta = 2.0 / (2.0 - gamma);
  e.alpha = gamma * e.beta;
  e.n = n;
  return e;
}

Exponents exponents_from_alpha(double alpha, int n) {
  if (!(alpha >= 0.0))
    throw std::domain_error("exponents_from_alpha: alpha must be >= 0");
  return derive_exponents(2.0 * alpha / (alpha + 2.0), n);
}

}  // namespace apfb
