#pragma once

#include <functional>
#include <vector>

#include "apfb/exponents.hpp"
#include "apfb/field.hpp"
#include "apfb/profiles.hpp"
#include "apfb/vfield.hpp"

namespace apfb {

// Stability potential in the v-form, W_v = (alpha/2) v^alpha (1-|grad v|^2)/v^2.
// The bounded factor (1-|grad v|^2)/(2v) has a finite limit at the free
// boundary; nodes closer than `cutoff` (default 2h) to it take that factor
// by linear extrapolation along the inward normal instead of the raw 0/0
// quotient. 1-|grad v|^2 is always evaluated as one expression.
ScalarField stability_potential_v(const ScalarField& v, const Exponents& exp);

// u-form, ((2-gamma)/2)(gamma/2) u^gamma (u^gamma - |grad u|^2)/u^2, with the
// difference u^gamma - |grad u|^2 evaluated through the v-variables where it
// is a clean O(d^(alpha+1)) quantity.
ScalarField stability_potential_u(const ScalarField& u, const Exponents& exp);

struct QuadFormReport {
  double gradient_term = 0.0;   // int v^alpha |grad phi|^2
  double potential_term = 0.0;  // int W_v phi^2
  double q = 0.0;               // gradient_term - potential_term
  int fb_cut_cells = 0;
  double fb_cutoff = 0.0;
};

// Q(phi) of the stability quadratic form for compactly supported probes.
QuadFormReport quad_form(const ScalarField& v, const Exponents& exp,
                         const std::function<double(double, double)>& phi,
                         const std::function<Vec2(double, double)>& grad_phi,
                         const Box& support);

struct SpectrumResult {
  double lambda_min = 0.0;
  std::vector<double> eigenvector;  // on region nodes, see rayleigh_min
  int iterations = 0;
  double residual = 0.0;
  int dofs = 0;
};

// Minimal generalized eigenvalue of the discrete Q against the mass
// int v^alpha phi^2 on masked nodes of `region`, by shifted inverse
// iteration with conjugate-gradient solves and a deterministic start.
SpectrumResult rayleigh_min(const ScalarField& v, const Exponents& exp,
                            const Box& region, double tol = 1e-8,
                            int max_outer = 500);

// Dense-path analogue for hand-assembled pencils (tests): minimal lambda of
// A x = lambda B x, A symmetric, B diagonal positive.
SpectrumResult min_generalized_eigen_dense(const std::vector<double>& a,
                                           const std::vector<double>& b, int n,
                                           double tol = 1e-10,
                                           int max_outer = 500);

struct AxisymCheck {
  double lhs = 0.0;  // (n-2) int v^alpha v_tau^2 / tau^2 eta^2
  double rhs = 0.0;  // int v^alpha v_tau^2 |grad eta|^2
  bool stable = true;  // lhs <= rhs + tol
};

AxisymCheck axisym_quad_form(const ScalarField& v, const Exponents& exp,
                             const std::function<double(double, double)>& eta,
                             const std::function<Vec2(double, double)>& grad_eta,
                             double tol = 0.0);

struct ThetaWindow {
  int n = 0;
  double alpha = 0.0;
  double lower = 0.0;       // n + alpha - 2
  double upper = 0.0;       // 2 sqrt(n-2)
  bool feasible = false;    // lower < upper
  double lambda = 0.0;      // sqrt(n-2)
  double n_lower = 0.0;     // 2 + (1 - sqrt(1-alpha))^2
  double n_upper = 0.0;     // 2 + (1 + sqrt(1-alpha))^2
  bool real_roots = true;   // false for alpha > 1 ("no real roots")
};

ThetaWindow theta_window(int n, double alpha);

// Lipschitz test function tau^(-theta/2) zeta_R(r), flattened to
// eps^(-theta/2) for tau <= eps; zeta_R is 1 on B_R and falls to 0 on
// B_2R.
struct ThetaTestFunction {
  double theta = 0.0;
  double eps = 0.0;
  double radius = 1.0;  // R
  double delta = 1.0;   // bookkeeping parameter of the (1+delta) split

  double value(double tau, double z) const;
  Vec2 grad(double tau, double z) const;
  // (1+delta) split of |grad eta|^2: the tau^(-theta-2) part and the
  // cutoff part, as in the classification proof
  double split_theta_part(double tau, double z) const;
  double split_cutoff_part(double tau, double z) const;
};

struct ThetaTestSamples {
  ThetaTestFunction fn;
  std::vector<double> eta, grad_sq, split_theta, split_cutoff;
};

ThetaTestSamples build_theta_test(double theta, double eps, double radius,
                                  const AxisymGrid& grid, double delta = 1.0);

struct CurvatureReport {
  double laplacian_limit = 0.0;   // extrapolated lim Delta v at the FB
  double vpp_extrapolated = 0.0;  // extrapolated v''(r0)
  double mean_curvature = 0.0;    // (n-1)/r0
  double gap_laplacian = 0.0;     // |lim Dv + alpha v''| / scale
  double gap_curvature = 0.0;     // |H + (1+alpha) v''| / |H|
  bool sign_consistent = false;   // H > 0 with the grad-u orientation
};

// Checks lim Delta v = -alpha v_nn and H = -(1+alpha) v_nn on a radial
// profile by Richardson extrapolation of trajectory samples toward r0.
CurvatureReport curvature_check(const RadialProfile& p);

struct AlphaLimitRow {
  double alpha = 0.0;
  double potential_integral = 0.0;  // int (alpha/2) v^(alpha-1) (1-|dv|^2)/v phi^2
  double target = 0.0;              // int_FB H phi^2 dsigma / (1+alpha)
  double gap = 0.0;
};

// alpha -> 0 limit table over a fixed-r0 radial family with a fixed radial
// probe phi(r). Integrals use the r^(n-1) line weight (angular constant
// dropped on both sides).
std::vector<AlphaLimitRow> limit_alpha_zero(
    int n, double r0, double r_max, const std::vector<double>& alphas,
    const std::function<double(double)>& phi, double tol = 1e-10);

}  // namespace apfb
