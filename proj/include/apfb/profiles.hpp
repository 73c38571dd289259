#pragma once

#include <optional>
#include <vector>

#include "apfb/exponents.hpp"
#include "apfb/field.hpp"
#include "apfb/grid.hpp"
#include "apfb/ode.hpp"

namespace apfb {

// u(t) = (t/beta)^beta on a 1D grid, the one-dimensional solution:
// u'' = (gamma/2) u^(gamma-1) with |u'|^2 = u^gamma along the profile.
struct OneDProfile {
  Exponents exp;
  Grid1D grid;
  std::vector<double> u, du;

  double u_at(double t) const;
  double du_at(double t) const;
  double ddu_at(double t) const;
};

OneDProfile one_d_profile(const Exponents& exp, const Grid1D& grid);

// Radial solution of v'' + (n-1) v'/r = (alpha/2)(1 - v'^2)/v outside the
// zero ball r <= r0, launched from the free boundary with v(r0)=0,
// v'(r0)=1. The two-term series v = s + a s^2, a = -(n-1)/(2(1+alpha) r0),
// starts the integration just off the singular point.
struct RadialProfile {
  Exponents exp;
  double r0 = 1.0;
  double r_max = 5.0;
  double tol = 1e-10;
  double series_offset = 0.0;   // integration starts at r0 + series_offset
  double vpp_r0 = 0.0;          // v''(r0) from the series launch
  double max_defect = 0.0;      // dense-output ODE defect, sampled
  OdeSolution sol;              // state (v, v')

  double v(double r) const;
  double dv(double r) const;
  double ddv(double r) const;   // from the ODE right-hand side
};

RadialProfile radial_profile(const Exponents& exp, double r0, double r_max,
                             double tol);

// Spherical profile h(theta) of a homogeneous degree-one candidate
// v = r h(theta):
//   h'' + (n-2) cot(theta) h' + (n-1) h = (alpha/2)(1 - h^2 - h'^2)/h,
// h(0)=h0, h'(0)=0, with the axis term replaced by its limit. The shot
// stops at the event h = h_stop (~0) and reports the free-boundary angle
// and the slope mismatch m = h' + sqrt(1 - h^2) there (m = 0 iff
// |grad v| = 1 on the free boundary).
struct ConeProfile {
  Exponents exp;
  double h0 = 1.0;
  double theta0 = 0.0;  // free-boundary angle (normal-form extrapolation)
  double m = 0.0;       // slope mismatch at the stop event
  double hpp0 = 0.0;    // h''(0) from the axis regularization
  double h_stop = 1e-6;
  double tol = 1e-8;
  OdeSolution sol;  // state (h, h')

  double h_at(double theta) const;
  double dh_at(double theta) const;
};

enum class ConeOutcome { Crossing, NoFreeBoundary };

struct ConeShot {
  ConeOutcome outcome = ConeOutcome::NoFreeBoundary;
  std::optional<ConeProfile> profile;  // set when outcome == Crossing
};

// Throws SolverError when |grad v|^2 = h^2 + h'^2 exceeds the blow-up bound.
ConeShot cone_shoot(const Exponents& exp, double h0, double tol);

// Bisection on the mismatch over an h0 bracket with opposite signs.
ConeProfile cone_solve(const Exponents& exp, double h0_lo, double h0_hi,
                       double tol);

struct ConeScanEntry {
  double h0 = 0.0;
  enum class Kind { Crossing, NoFreeBoundary, Diverged } kind = Kind::Diverged;
  double theta0 = 0.0;
  double m = 0.0;
};

struct ConeScanResult {
  std::vector<ConeScanEntry> entries;        // in h0 order
  std::vector<ConeProfile> cones;            // converged roots
};

// Shoots over log-spaced h0 values (in parallel when threads > 1, results
// merged in h0 order) and converges every bracketed root of m(h0).
ConeScanResult cone_scan(const Exponents& exp, double h0_lo, double h0_hi,
                         int count, double tol, int threads = 1);

// Whether a converged cone is the flat one (h = h0 cos(theta) with h0 = 1,
// i.e. the one-dimensional solution in disguise).
bool cone_is_flat(const ConeProfile& cone, double tol = 1e-4);

// Change of variables v = beta u^(1/beta) and its inverse. Masks are
// preserved; an attached analytic gradient is transported through
// grad v = grad u / u^(gamma/2) (and back).
ScalarField v_from_u(const ScalarField& u, const Exponents& exp);
ScalarField u_from_v(const ScalarField& v, const Exponents& exp);

// Centered tau-derivative of an axisymmetric field; odd extension across
// the axis, one-sided second order at mask boundaries. The result reuses
// the ScalarField container but carries signed values.
ScalarField v_tau_field(const ScalarField& v);

// Samplers onto grids.
ScalarField field_from_1d(const OneDProfile& p, const AxisymGrid& g,
                          bool as_v, bool analytic_gradient);
ScalarField field_from_radial(const RadialProfile& p, const AxisymGrid& g,
                              bool analytic_gradient);
ScalarField field_from_cone(const ConeProfile& p, const AxisymGrid& g,
                            bool analytic_gradient);

}  // namespace apfb
