#include "apfb/field.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "apfb/io.hpp"

namespace apfb {

ScalarField make_field(const AxisymGrid& grid,
                       const std::function<double(double, double)>& f) {
  ScalarField out;
  out.grid = grid;
  out.values.resize(grid.size());
  out.mask.resize(grid.size());
  for (int i = 0; i < grid.ntau; ++i)
    for (int j = 0; j < grid.nz; ++j) {
      const double v = f(grid.tau(i), grid.z(j));
      if (v < 0.0)
        throw std::domain_error("make_field: fields must be nonnegative");
      out.values[grid.index(i, j)] = v;
      out.mask[grid.index(i, j)] = v > 0.0 ? 1 : 0;
    }
  return out;
}

ScalarField make_field(const AxisymGrid& grid,
                       const std::function<double(double, double)>& f,
                       const std::function<Vec2(double, double)>& df) {
  ScalarField out = make_field(grid, f);
  out.grad.resize(grid.size());
  for (int i = 0; i < grid.ntau; ++i)
    for (int j = 0; j < grid.nz; ++j)
      out.grad[grid.index(i, j)] =
          out.mask[grid.index(i, j)] ? df(grid.tau(i), grid.z(j)) : Vec2{};
  return out;
}

void normalize_mask(ScalarField& f) {
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    if (f.values[k] > 0.0) {
      f.mask[k] = 1;
    } else {
      f.values[k] = 0.0;
      f.mask[k] = 0;
    }
  }
}

namespace {

// One-dimensional derivative along a grid line. `at` reads value, `ok`
// tells whether a node may enter the stencil.
template <class Val, class Ok>
double line_derivative(int j, int jmax, double h, Val at, Ok ok) {
  const bool lo = j > 0 && ok(j - 1);
  const bool hi = j + 1 <= jmax && ok(j + 1);
  if (lo && hi) return (at(j + 1) - at(j - 1)) / (2.0 * h);
  if (hi) {
    if (j + 2 <= jmax && ok(j + 2))
      return (-3.0 * at(j) + 4.0 * at(j + 1) - at(j + 2)) / (2.0 * h);
    return (at(j + 1) - at(j)) / h;
  }
  if (lo) {
    if (j - 2 >= 0 && ok(j - 2))
      return (3.0 * at(j) - 4.0 * at(j - 1) + at(j - 2)) / (2.0 * h);
    return (at(j) - at(j - 1)) / h;
  }
  return 0.0;
}

}  // namespace

std::vector<Vec2> nodal_gradient(const ScalarField& f) {
  const AxisymGrid& g = f.grid;
  std::vector<Vec2> out(g.size());
  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      if (!f.masked(i, j)) continue;
      Vec2 dv;
      if (i == 0) {
        dv.tau = 0.0;  // even extension across the axis
      } else {
        dv.tau = line_derivative(
            i, g.ntau - 1, g.h, [&](int q) { return f.value(q, j); },
            [&](int q) { return f.masked(q, j); });
      }
      dv.z = line_derivative(
          j, g.nz - 1, g.h, [&](int q) { return f.value(i, q); },
          [&](int q) { return f.masked(i, q); });
      out[g.index(i, j)] = dv;
    }
  }
  return out;
}

std::vector<Vec2> gradient_or_fd(const ScalarField& f) {
  if (f.has_gradient()) return f.grad;
  return nodal_gradient(f);
}

namespace {

// 1D squared-distance transform (lower envelope of parabolas).
void dt_1d(const std::vector<double>& fin, std::vector<double>& dout,
           std::vector<int>& vtx, std::vector<double>& bnd) {
  const int n = static_cast<int>(fin.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  vtx[0] = 0;
  bnd[0] = -inf;
  bnd[1] = inf;
  for (int q = 1; q < n; ++q) {
    if (fin[q] == inf) continue;
    double s;
    while (true) {
      const int p = vtx[k];
      if (fin[p] == inf) {
        // no finite parabola yet
        if (k == 0) {
          vtx[0] = q;
          bnd[0] = -inf;
          bnd[1] = inf;
          s = -inf;
          break;
        }
        --k;
        continue;
      }
      s = ((fin[q] + double(q) * q) - (fin[p] + double(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s <= bnd[k]) {
        --k;
      } else {
        ++k;
        vtx[k] = q;
        bnd[k] = s;
        bnd[k + 1] = inf;
        break;
      }
    }
  }
  int kk = 0;
  for (int q = 0; q < n; ++q) {
    while (bnd[kk + 1] < q) ++kk;
    const int p = vtx[kk];
    dout[q] = fin[p] == inf ? inf : double(q - p) * (q - p) + fin[p];
  }
}

}  // namespace

DistanceField distance_to_fb(const ScalarField& f) {
  const AxisymGrid& g = f.grid;
  DistanceField out;
  out.grid = g;
  out.d.assign(g.size(), 0.0);

  bool any_zero = false, any_pos = false;
  for (std::size_t k = 0; k < g.size(); ++k)
    (f.mask[k] ? any_pos : any_zero) = true;
  if (!any_zero) {
    out.has_free_boundary = false;  // sentinel: no free boundary in view
    out.d.assign(g.size(), std::numeric_limits<double>::infinity());
    return out;
  }
  out.has_free_boundary = true;
  if (!any_pos) return out;  // all nodes belong to the zero set

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> sq(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) sq[k] = f.mask[k] ? inf : 0.0;

  const int nmax = std::max(g.ntau, g.nz);
  std::vector<double> fin(nmax), dout(nmax), bnd(nmax + 1);
  std::vector<int> vtx(nmax);

  // pass 1: along z (contiguous columns)
  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) fin[j] = sq[g.index(i, j)];
    dt_1d({fin.begin(), fin.begin() + g.nz}, dout, vtx, bnd);
    for (int j = 0; j < g.nz; ++j) sq[g.index(i, j)] = dout[j];
  }
  // pass 2: along tau
  for (int j = 0; j < g.nz; ++j) {
    for (int i = 0; i < g.ntau; ++i) fin[i] = sq[g.index(i, j)];
    dt_1d({fin.begin(), fin.begin() + g.ntau}, dout, vtx, bnd);
    for (int i = 0; i < g.ntau; ++i) sq[g.index(i, j)] = dout[i];
  }

  for (std::size_t k = 0; k < g.size(); ++k)
    out.d[k] = g.h * std::sqrt(sq[k]);
  return out;
}

void write_field_csv(const ScalarField& f, const std::string& path) {
  std::string body = "tau,z,value,mask\n";
  for (int i = 0; i < f.grid.ntau; ++i)
    for (int j = 0; j < f.grid.nz; ++j) {
      body += format_g17(f.grid.tau(i));
      body += ',';
      body += format_g17(f.grid.z(j));
      body += ',';
      body += format_g17(f.value(i, j));
      body += ',';
      body += f.masked(i, j) ? '1' : '0';
      body += '\n';
    }
  write_file_atomic(path, body);
}

ScalarField read_field_csv(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_field_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "tau,z,value,mask")
    throw std::runtime_error("read_field_csv: bad header in " + path);

  std::vector<double> taus, zs, vals;
  std::vector<std::uint8_t> msk;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    double row[3];
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(ss, tok, ','))
        throw std::runtime_error("read_field_csv: short row");
      row[c] = std::stod(tok);
    }
    if (!std::getline(ss, tok, ','))
      throw std::runtime_error("read_field_csv: short row");
    taus.push_back(row[0]);
    zs.push_back(row[1]);
    vals.push_back(row[2]);
    msk.push_back(tok == "1" ? 1 : 0);
  }
  if (taus.empty()) throw std::runtime_error("read_field_csv: empty file");

  // nodes were written z-fastest; recover the tensor structure
  int nz = 1;
  while (nz < static_cast<int>(zs.size()) && zs[nz] != zs[0]) ++nz;
  const int ntau = static_cast<int>(taus.size()) / nz;
  if (static_cast<std::size_t>(ntau) * nz != taus.size())
    throw std::runtime_error("read_field_csv: not a tensor grid");

  ScalarField f;
  f.grid.h = nz > 1 ? zs[1] - zs[0] : taus[nz] - taus[0];
  f.grid.dim = dim;
  f.grid.tau_max = taus.back();
  f.grid.z_min = zs[0];
  f.grid.z_max = zs[nz - 1];
  f.grid.ntau = ntau;
  f.grid.nz = nz;
  f.values = std::move(vals);
  f.mask = std::move(msk);
  return f;
}

}  // namespace apfb
