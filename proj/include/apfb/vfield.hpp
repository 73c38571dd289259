#pragma once

#include <functional>

#include "apfb/grid.hpp"

namespace apfb {

// 2x2 meridian block of a vector-field differential:
//   [ d(phi_tau)/d(tau)  d(phi_tau)/dz ]
//   [ d(phi_z)/d(tau)    d(phi_z)/dz   ]
struct Mat2 {
  double tt = 0.0, tz = 0.0, zt = 0.0, zz = 0.0;
};

inline Vec2 apply(const Mat2& m, const Vec2& g) {
  return {m.tt * g.tau + m.tz * g.z, m.zt * g.tau + m.zz * g.z};
}
inline Vec2 apply_transpose(const Mat2& m, const Vec2& g) {
  return {m.tt * g.tau + m.zt * g.z, m.tz * g.tau + m.zz * g.z};
}
inline double dot(const Vec2& a, const Vec2& b) {
  return a.tau * b.tau + a.z * b.z;
}

struct Box {
  double tau_lo = 0.0, tau_hi = 0.0, z_lo = 0.0, z_hi = 0.0;
  bool contains(double t, double z) const {
    return t >= tau_lo && t <= tau_hi && z >= z_lo && z <= z_hi;
  }
};

// Compactly supported axisymmetric vector field Phi with analytic
// differential; Phi and DPhi must vanish outside `support`, and
// phi_tau must vanish on the axis when support touches tau = 0.
struct VectorFieldSpec {
  std::function<Vec2(double, double)> phi;
  std::function<Mat2(double, double)> dphi;
  Box support;
};

// Full n-dimensional divergence of an axisymmetric field:
// d(phi_tau)/dtau + (n-2) phi_tau/tau + d(phi_z)/dz, with the axis value
// of phi_tau/tau replaced by its limit d(phi_tau)/dtau.
inline double divergence(const VectorFieldSpec& f, double tau, double z,
                         int dim) {
  const Mat2 m = f.dphi(tau, z);
  double div = m.tt + m.zz;
  if (dim > 2) {
    const double ratio = tau > 0.0 ? f.phi(tau, z).tau / tau : m.tt;
    div += (dim - 2) * ratio;
  }
  return div;
}

// C^2 tensor bump supported on [c-w, c+w]: ((1-s^2)^3, s=(x-c)/w), zero
// outside. Handy building block for probes and variations.
double bump3(double x, double c, double w);
double bump3_d(double x, double c, double w);

// Compactly supported scalar probe phi = A * bump3(tau) * bump3(z).
struct ScalarProbe {
  double amp = 1.0;
  double ctau = 0.0, wtau = 1.0;
  double cz = 0.0, wz = 1.0;

  double operator()(double tau, double z) const;
  Vec2 grad(double tau, double z) const;
  Box support() const {
    return {ctau - wtau, ctau + wtau, cz - wz, cz + wz};
  }
};

}  // namespace apfb
