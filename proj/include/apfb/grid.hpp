#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace apfb {

struct Vec2 {
  double tau = 0.0;
  double z = 0.0;
};

// Uniform 1D grid t0 + i*h, i = 0..m-1.
struct Grid1D {
  double t0 = 0.0;
  double h = 0.0;
  int m = 0;

  double t(int i) const { return t0 + i * h; }
  double t1() const { return t(m - 1); }
};

Grid1D make_grid_1d(double t0, double t1, double h);

// Uniform tensor grid on the meridian half-plane (tau, z),
// tau in [0, tau_max], z in [z_min, z_max]. Integrals over R^n of
// axisymmetric integrands reduce to this plane against the weight
// tau^(n-2) (angular constant dropped throughout).
struct AxisymGrid {
  double tau_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
  double h = 0.0;
  int dim = 2;  // ambient dimension n
  int ntau = 0;
  int nz = 0;

  double tau(int i) const { return i * h; }
  double z(int j) const { return z_min + j * h; }
  // z varies fastest: whole tau-columns are contiguous.
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * nz + j;
  }
  std::size_t size() const { return static_cast<std::size_t>(ntau) * nz; }

  // Meridian weight tau^(n-2); identically 1 when dim == 2.
  double weight(int i) const {
    if (dim == 2) return 1.0;
    const double t = tau(i);
    return dim == 3 ? t : std::pow(t, dim - 2);
  }

  bool inside(double t, double zz) const {
    return t >= 0.0 && t <= tau_max && zz >= z_min && zz <= z_max;
  }
};

AxisymGrid make_axisym_grid(double tau_max, double z_min, double z_max,
                            double h, int dim);

}  // namespace apfb
