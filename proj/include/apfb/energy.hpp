#pragma once

#include <functional>
#include <limits>
#include <optional>

#include "apfb/exponents.hpp"
#include "apfb/field.hpp"
#include "apfb/vfield.hpp"

namespace apfb {

struct EnergyReport {
  double total = 0.0;
  double gradient_part = 0.0;
  double potential_part = 0.0;
  double h = 0.0;
  Exponents exp;
};

// E[w] = int G(w) (|grad w|^2 + F(w)) over the mask, with the tau^(n-2)
// weight. G and F act on nodal values; the characteristic function of the
// positivity set is realized by the stored mask, never by thresholding.
//
// Near the free boundary the integrand of the problems at hand behaves like
// (bounded) * v^p where v = fb_transform(w) vanishes linearly; supplying
// fb_exponent/fb_transform turns on the singular-band quadrature.
struct GeneralEnergySpec {
  std::function<double(double)> G;
  std::function<double(double)> F;
  double fb_exponent = std::numeric_limits<double>::infinity();
  std::function<double(double)> fb_transform;  // value -> v
};

GeneralEnergySpec ap_energy_spec(const Exponents& exp);
GeneralEnergySpec mod_energy_spec(const Exponents& exp);

// Alt-Phillips energy int (|grad u|^2 + u^gamma chi_{u>0}).
EnergyReport energy_ap(const ScalarField& u, const Exponents& exp);
// Modified energy int v^alpha chi_{v>0} (|grad v|^2 + 1).
EnergyReport energy_mod(const ScalarField& v, const Exponents& exp);
EnergyReport general_energy(const ScalarField& w, const GeneralEnergySpec& s);

// First-order coefficient of E[w o T_eps^{-1}], T_eps = id + eps Phi:
//   int G(w)(|grad w|^2 + F(w)) div Phi - 2 int G(w) grad w . DPhi grad w.
// Throws ValidationError when the support of Phi touches the grid boundary.
double first_variation(const ScalarField& w, const GeneralEnergySpec& s,
                       const VectorFieldSpec& phi);

// Second-order coefficient of the same expansion:
//   int G(w) [ (|grad w|^2+F(w)) ((div Phi)^2 - Tr (DPhi)^2)/2
//              + |DPhi^T grad w|^2
//              + 2 w_i w_j (Phi^i_l Phi^l_j - Phi^i_j Phi^l_l) ].
double second_variation_closed_form(const ScalarField& w,
                                    const GeneralEnergySpec& s,
                                    const VectorFieldSpec& phi);

}  // namespace apfb
