#pragma once

#include <functional>
#include <span>
#include <vector>

#include "apfb/io.hpp"

namespace apfb {

// Right-hand side y' = f(t, y). Fixed small dimension, passed as raw spans.
using OdeRhs = std::function<void(double t, const double* y, double* dy)>;

// Scalar event g(t, y); integration stops at the first sign change of g,
// located on the dense output.
using OdeEvent = std::function<double(double t, const double* y)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-4;
  double h_max = 0.1;
  double h_min = 1e-14;
  int max_steps = 500000;
};

// Continuous extension of one accepted step (quartic in the step fraction).
struct DenseStep {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> r1, r2, r3, r4, r5;
};

class OdeSolution {
 public:
  std::vector<DenseStep> steps;
  double t_begin = 0.0;
  double t_end = 0.0;
  int dim = 0;

  void eval(double t, double* y) const;
  void eval_derivative(double t, double* dy) const;
  double eval1(double t, int comp = 0) const;

 private:
  const DenseStep& locate(double t) const;
};

struct OdeResult {
  OdeSolution sol;
  bool event_hit = false;
  double t_event = 0.0;
  std::vector<double> y_event;
  int steps_accepted = 0;
};

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with dense output.
// Throws SolverError on step-size underflow or step-count exhaustion.
OdeResult integrate_ode(const OdeRhs& rhs, double t0,
                        std::span<const double> y0, double t1,
                        const OdeOptions& opts,
                        const OdeEvent* event = nullptr);

}  // namespace apfb
