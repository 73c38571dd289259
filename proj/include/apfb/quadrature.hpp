#pragma once

#include <cstdint>
#include <vector>

#include "apfb/grid.hpp"

namespace apfb {

// Near the free boundary the integrands of this problem look like
// S(x) * v(x)^p with S bounded and v vanishing linearly; for p < 1 a plain
// composite rule only converges at order 1+p. Passing the vanishing field v
// and the exponent p lets the quadrature subtract the leading singular
// model analytically over a short band of cells at every mask transition,
// restoring second order.
struct FbSingularity {
  const std::vector<double>* v = nullptr;
  double p = 1.0;
};

// Composite trapezoid over the masked region of the meridian plane with the
// tau^(n-2) weight applied internally. `density` holds the integrand samples
// (without the tau weight); unmasked nodes contribute nothing. Summation
// order is fixed and deterministic.
double integrate_masked(const AxisymGrid& g, const std::vector<double>& density,
                        const std::vector<std::uint8_t>& mask,
                        const FbSingularity* fb = nullptr);

// Same, mask all true.
double integrate_all(const AxisymGrid& g, const std::vector<double>& density);

// 1D composite trapezoid with the same singular-band treatment at mask
// transitions. `x0`,`h` describe the uniform abscissas of `f`.
double integrate_masked_1d(double x0, double h, const std::vector<double>& f,
                           const std::vector<std::uint8_t>& mask,
                           const FbSingularity* fb = nullptr);

}  // namespace apfb
