#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apfb/grid.hpp"

namespace apfb {

// Nodal samples of a nonnegative scalar on an AxisymGrid together with the
// positivity mask chi_{.>0}. Values are zero wherever the mask is false.
// An analytic nodal gradient may be attached; consumers fall back to
// second-order finite differences (one-sided into the positive phase at
// mask boundaries) when it is absent.
struct ScalarField {
  AxisymGrid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  std::vector<Vec2> grad;  // empty unless an analytic gradient is attached

  bool has_gradient() const { return !grad.empty(); }
  double value(int i, int j) const { return values[grid.index(i, j)]; }
  bool masked(int i, int j) const { return mask[grid.index(i, j)] != 0; }
};

ScalarField make_field(const AxisymGrid& grid,
                       const std::function<double(double, double)>& f);
ScalarField make_field(const AxisymGrid& grid,
                       const std::function<double(double, double)>& f,
                       const std::function<Vec2(double, double)>& df);

// Sets mask = (value > 0) and zeroes negative round-off residue.
void normalize_mask(ScalarField& f);

// Finite-difference nodal gradient. Centered in the mask interior,
// one-sided second order where a neighbor leaves the mask or the grid,
// zero on unmasked nodes. The tau-derivative on the axis is zero by the
// even symmetry of axisymmetric fields.
std::vector<Vec2> nodal_gradient(const ScalarField& f);

// Attached gradient if present, otherwise nodal_gradient.
std::vector<Vec2> gradient_or_fd(const ScalarField& f);

// Distance to the zero set {value == 0}, one value per node.
struct DistanceField {
  AxisymGrid grid;
  std::vector<double> d;
  bool has_free_boundary = false;  // false: field positive everywhere
};

// Exact Euclidean distance to the nearest zero node (two-pass transform).
DistanceField distance_to_fb(const ScalarField& f);

// CSV dump with header `tau,z,value,mask`, 17 significant digits;
// bit-exact round trip through read_field_csv.
void write_field_csv(const ScalarField& f, const std::string& path);
ScalarField read_field_csv(const std::string& path, int dim);

}  // namespace apfb
