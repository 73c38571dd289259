#include "apfb/grid.hpp"

#include <string>

namespace apfb {

namespace {
int node_count(double span, double h, const char* what) {
  if (!(h > 0.0)) throw std::domain_error(std::string(what) + ": spacing must be positive");
  if (!(span > 0.0)) throw std::domain_error(std::string(what) + ": extent must be positive");
  const double cells = span / h;
  const int m = static_cast<int>(std::lround(cells));
  if (m < 1 || std::abs(cells - m) > 1e-9 * std::max(1.0, cells))
    throw std::domain_error(std::string(what) +
                            ": extent must be an integer number of cells");
  return m + 1;
}
}  // namespace

Grid1D make_grid_1d(double t0, double t1, double h) {
  Grid1D g;
  g.t0 = t0;
  g.h = h;
  g.m = node_count(t1 - t0, h, "make_grid_1d");
  return g;
}

AxisymGrid make_axisym_grid(double tau_max, double z_min, double z_max,
                            double h, int dim) {
  if (dim < 2)
    throw std::domain_error("make_axisym_grid: ambient dimension must be >= 2");
  AxisymGrid g;
  g.tau_max = tau_max;
  g.z_min = z_min;
  g.z_max = z_max;
  g.h = h;
  g.dim = dim;
  g.ntau = node_count(tau_max, h, "make_axisym_grid(tau)");
  g.nz = node_count(z_max - z_min, h, "make_axisym_grid(z)");
  if (tau_max < 10.0 * h || z_max - z_min < 10.0 * h)
    throw std::domain_error("make_axisym_grid: extents must cover >= 10 cells");
  return g;
}

}  // namespace apfb
