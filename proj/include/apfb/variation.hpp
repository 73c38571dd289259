#pragma once

#include <vector>

#include "apfb/energy.hpp"
#include "apfb/field.hpp"
#include "apfb/vfield.hpp"

namespace apfb {

// Domain-variation competitor machinery: u_eps = u o T_eps^{-1} with
// T_eps = id + eps Phi.
struct VariationSpec {
  VectorFieldSpec field;
  std::vector<double> ladder;  // eps values; default 8 from 1e-2, halving

  static std::vector<double> default_ladder(double eps0 = 1e-2, int count = 8);
};

// Inverse map to machine precision by the fixed-point iteration
// x <- y - eps Phi(x) (never the truncated series), values sampled by
// local cubic interpolation of the field clamped to the stencil range.
// The pulled-back field carries the exactly transformed gradient
// (I + eps DPhi(x*))^{-T} grad(x*).
ScalarField pullback(const ScalarField& w, const VariationSpec& spec,
                     double eps);

struct ExpansionFit {
  double e0 = 0.0, e1 = 0.0, e2 = 0.0, e3 = 0.0;
  double residual = 0.0;      // rms misfit of the cubic model
  double condition = 0.0;     // R-diagonal ratio of the normalized design
};

// Least squares of energies against {1, eps, eps^2, eps^3}; needs >= 5
// ladder points. Throws SolverError on a rank-deficient design.
ExpansionFit fit_expansion(const std::vector<double>& eps,
                           const std::vector<double>& energies);

struct VerifyReport {
  ExpansionFit fitted;
  double closed_e1 = 0.0;
  double closed_e2 = 0.0;
  double rel_gap_e1 = 0.0;
  double rel_gap_e2 = 0.0;
  double h = 0.0;
  std::vector<double> ladder;
  std::vector<double> energies;
};

// Pullback energies over the ladder, cubic fit, comparison against the
// closed-form first and second variation coefficients.
VerifyReport verify_expansion(const ScalarField& w, const GeneralEnergySpec& s,
                              const VariationSpec& spec);

// Small dense matrix, row major.
struct SmallMat {
  int n = 0;
  std::vector<double> a;

  static SmallMat identity(int n);
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * n + j];
  }
};

double det(const SmallMat& m);  // LU with partial pivoting
double trace(const SmallMat& m);
double trace_sq(const SmallMat& m);  // Tr(A^2)

struct ExpansionCheck {
  double exact = 0.0;
  double truncated = 0.0;
  double error = 0.0;  // exact - truncated
};

// det(I + eps A) against 1 + eps Tr A + eps^2 ((Tr A)^2 - Tr A^2)/2.
ExpansionCheck det_expansion(const SmallMat& a, double eps);

// |M_eps^T q|^2, M_eps = I + eps A + eps^2 B, against
// |q|^2 + 2 eps q.Aq + eps^2 (|A^T q|^2 + 2 q.Bq).
ExpansionCheck normsq_expansion(const SmallMat& a, const SmallMat& b,
                                const std::vector<double>& q, double eps);

}  // namespace apfb
