#include "apfb/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "apfb/io.hpp"
#include "apfb/kernels.hpp"
#include "apfb/quadrature.hpp"

namespace apfb {

namespace {

// Bounded free-boundary factor B = (1 - |grad v|^2) / (2 v): finite limit
// -v_nn at the free boundary. Near-FB nodes replace the raw quotient by a
// linear extrapolation of B along the inward normal.
struct PotentialData {
  std::vector<double> w;  // W_v samples
  int near_fb_nodes = 0;
  double cutoff = 0.0;
};

double bilinear(const AxisymGrid& g, const std::vector<double>& f, double tau,
                double z) {
  const double xi = std::clamp(tau / g.h, 0.0, g.ntau - 1.001);
  const double zj = std::clamp((z - g.z_min) / g.h, 0.0, g.nz - 1.001);
  const int i = static_cast<int>(xi), j = static_cast<int>(zj);
  const double fx = xi - i, fz = zj - j;
  return (1 - fx) * (1 - fz) * f[g.index(i, j)] +
         fx * (1 - fz) * f[g.index(i + 1, j)] +
         (1 - fx) * fz * f[g.index(i, j + 1)] +
         fx * fz * f[g.index(i + 1, j + 1)];
}

PotentialData potential_data_v(const ScalarField& v, const Exponents& exp) {
  const AxisymGrid& g = v.grid;
  PotentialData out;
  out.w.assign(g.size(), 0.0);
  out.cutoff = 2.0 * g.h;
  if (exp.alpha == 0.0) return out;  // alpha/2 prefactor kills the potential

  const auto grad = gradient_or_fd(v);
  const DistanceField dist = distance_to_fb(v);
  const bool has_fb = dist.has_free_boundary;

  // raw bounded factor everywhere in the mask
  std::vector<double> braw(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!v.mask[k] || v.values[k] <= 0.0) continue;
    const double g2 = dot(grad[k], grad[k]);
    braw[k] = (1.0 - g2) / (2.0 * v.values[k]);
  }

  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      if (!v.mask[k] || v.values[k] <= 0.0) continue;
      double b = braw[k];
      if (has_fb && dist.d[k] < out.cutoff) {
        ++out.near_fb_nodes;
        const Vec2 gr = grad[k];
        const double gn = std::sqrt(dot(gr, gr));
        if (gn > 1e-12) {
          // step inward until both probe points are past the cutoff
          const double t1 = out.cutoff - dist.d[k] + g.h;
          const double t2 = t1 + g.h;
          const double et = gr.tau / gn, ez = gr.z / gn;
          const double b1 =
              bilinear(g, braw, g.tau(i) + t1 * et, g.z(j) + t1 * ez);
          const double b2 =
              bilinear(g, braw, g.tau(i) + t2 * et, g.z(j) + t2 * ez);
          b = b1 + (b1 - b2) * t1 / (t2 - t1);
        }
      }
      out.w[k] = exp.alpha * std::pow(v.values[k], exp.alpha - 1.0) * b;
    }
  }
  return out;
}

}  // namespace

ScalarField stability_potential_v(const ScalarField& v, const Exponents& exp) {
  PotentialData d = potential_data_v(v, exp);
  ScalarField out;
  out.grid = v.grid;
  out.values = std::move(d.w);
  out.mask = v.mask;
  return out;
}

ScalarField stability_potential_u(const ScalarField& u, const Exponents& exp) {
  const AxisymGrid& g = u.grid;
  ScalarField out;
  out.grid = g;
  out.values.assign(g.size(), 0.0);
  out.mask = u.mask;
  if (exp.gamma == 0.0) return out;

  const auto grad = gradient_or_fd(u);
  const DistanceField dist = distance_to_fb(u);
  const double cutoff = 2.0 * g.h;

  // bounded factor in u-variables: (1 - |grad u|^2/u^gamma) / (2 v),
  // v = beta u^(1/beta); equals the v-form factor up to discretization
  std::vector<double> braw(g.size(), 0.0), vlin(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!u.mask[k] || u.values[k] <= 0.0) continue;
    const double ug = std::pow(u.values[k], exp.gamma);
    const double vv = exp.beta * std::pow(u.values[k], 1.0 / exp.beta);
    vlin[k] = vv;
    const double t = dot(grad[k], grad[k]) / ug;
    braw[k] = (1.0 - t) / (2.0 * vv);
  }

  const double cpre = 0.5 * (2.0 - exp.gamma) * 0.5 * exp.gamma;
  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      if (!u.mask[k] || u.values[k] <= 0.0) continue;
      double b = braw[k];
      if (dist.has_free_boundary && dist.d[k] < cutoff) {
        const Vec2 gr = grad[k];
        const double gn = std::sqrt(dot(gr, gr));
        if (gn > 1e-12) {
          const double t1 = cutoff - dist.d[k] + g.h;
          const double t2 = t1 + g.h;
          const double et = gr.tau / gn, ez = gr.z / gn;
          const double b1 =
              bilinear(g, braw, g.tau(i) + t1 * et, g.z(j) + t1 * ez);
          const double b2 =
              bilinear(g, braw, g.tau(i) + t2 * et, g.z(j) + t2 * ez);
          b = b1 + (b1 - b2) * t1 / (t2 - t1);
        }
      }
      // W_u = ((2-g)/2)(g/2) u^g (u^g - |grad u|^2)/u^2
      //     = ((2-g)/2) g u^(2g-2) * ... collected through the bounded factor:
      //       u^g (u^g - |du|^2)/u^2 = u^(2g) (1-t)/u^2 and
      //       (1-t) = 2 b v, u^(2g-2) v = beta^(1-2g)? -- keep it direct:
      const double ug = std::pow(u.values[k], exp.gamma);
      out.values[k] =
          cpre * ug * ug / (u.values[k] * u.values[k]) * (2.0 * b * vlin[k]);
    }
  }
  return out;
}

QuadFormReport quad_form(const ScalarField& v, const Exponents& exp,
                         const std::function<double(double, double)>& phi,
                         const std::function<Vec2(double, double)>& grad_phi,
                         const Box& support) {
  const AxisymGrid& g = v.grid;
  if (!(support.tau_hi < g.tau_max - 0.5 * g.h &&
        support.z_lo > g.z_min + 0.5 * g.h &&
        support.z_hi < g.z_max - 0.5 * g.h))
    throw ValidationError("quad_form: probe support touches the grid boundary");

  PotentialData pot = potential_data_v(v, exp);

  std::vector<double> dgrad(g.size(), 0.0), dpot(g.size(), 0.0);
  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      if (!v.mask[k]) continue;
      const double t = g.tau(i), zz = g.z(j);
      if (!support.contains(t, zz)) continue;
      const double va = std::pow(v.values[k], exp.alpha);
      const Vec2 gp = grad_phi(t, zz);
      const double p = phi(t, zz);
      dgrad[k] = va * dot(gp, gp);
      dpot[k] = pot.w[k] * p * p;
    }
  }

  QuadFormReport rep;
  rep.fb_cutoff = pot.cutoff;
  rep.fb_cut_cells = pot.near_fb_nodes;
  FbSingularity fba{&v.values, exp.alpha};
  FbSingularity fbp{&v.values, exp.alpha - 1.0};
  rep.gradient_term = integrate_masked(g, dgrad, v.mask,
                                       exp.alpha < 2.0 ? &fba : nullptr);
  rep.potential_term =
      integrate_masked(g, dpot, v.mask, exp.alpha < 3.0 ? &fbp : nullptr);
  rep.q = rep.gradient_term - rep.potential_term;
  return rep;
}

// ---------------------------------------------------------------------------
// eigensolver

namespace {

// Symmetric operator pencil (Q, M) with M diagonal positive.
struct Pencil {
  // CSR-like: for each dof, its diagonal and (neighbor, weight) pairs of the
  // stiffness; potential and mass are diagonal.
  std::vector<double> sdiag;
  std::vector<int> nbr_ptr;
  std::vector<int> nbr_idx;
  std::vector<double> nbr_w;
  std::vector<double> pot;    // potential diagonal (subtracted)
  std::vector<double> mass;   // mass diagonal
  int n = 0;

  void apply_q(const std::vector<double>& x, std::vector<double>& y) const {
    for (int r = 0; r < n; ++r) {
      double s = (sdiag[r] - pot[r]) * x[r];
      for (int p = nbr_ptr[r]; p < nbr_ptr[r + 1]; ++p)
        s += nbr_w[p] * x[nbr_idx[p]];
      y[r] = s;
    }
  }
};

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  return kernels::dot(a, b);
}

// CG for (Q - sigma M) x = b; returns false if the operator is detected
// indefinite (shift too high).
bool cg_shifted(const Pencil& pc, double sigma, const std::vector<double>& b,
                std::vector<double>& x, double rtol, int maxit) {
  const int n = pc.n;
  std::vector<double> r = b, p, ap(n), z(n);
  std::fill(x.begin(), x.end(), 0.0);
  // Jacobi preconditioner
  std::vector<double> dinv(n);
  for (int i = 0; i < n; ++i) {
    const double d = pc.sdiag[i] - pc.pot[i] - sigma * pc.mass[i];
    if (!(d > 0.0)) return false;
    dinv[i] = 1.0 / d;
  }
  auto precond = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    for (int i = 0; i < n; ++i) zz[i] = dinv[i] * rr[i];
  };
  precond(r, z);
  p = z;
  double rz = dotv(r, z);
  const double b2 = std::sqrt(dotv(b, b));
  if (b2 == 0.0) return true;
  for (int it = 0; it < maxit; ++it) {
    pc.apply_q(p, ap);
    for (int i = 0; i < n; ++i) ap[i] -= sigma * pc.mass[i] * p[i];
    const double pap = dotv(p, ap);
    if (!(pap > 0.0)) return false;  // indefinite
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if (std::sqrt(dotv(r, r)) <= rtol * b2) return true;
    precond(r, z);
    const double rz_new = dotv(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return true;  // loose solve still usable by inverse iteration
}

SpectrumResult inverse_iteration(const Pencil& pc, double tol, int max_outer) {
  const int n = pc.n;
  SpectrumResult res;
  res.dofs = n;
  if (n == 0) throw SolverError("rayleigh_min: empty dof set");

  std::vector<double> x(n, 1.0), qx(n), y(n);
  auto mnorm = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += pc.mass[i] * v[i] * v[i];
    return std::sqrt(s);
  };
  const double nx = mnorm(x);
  for (auto& xi : x) xi /= nx;

  double rho = 0.0;
  for (int outer = 0; outer < max_outer; ++outer) {
    pc.apply_q(x, qx);
    rho = dotv(x, qx);  // x is M-normalized
    // residual ||Q x - rho M x||
    double rnorm = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ri = qx[i] - rho * pc.mass[i] * x[i];
      rnorm += ri * ri;
      scale += qx[i] * qx[i];
    }
    rnorm = std::sqrt(rnorm);
    scale = std::sqrt(scale) + std::abs(rho) + 1e-300;
    res.iterations = outer;
    res.residual = rnorm / scale;
    if (res.residual <= tol) break;
    if (outer == max_outer - 1)
      throw SolverError("rayleigh_min: inverse iteration did not converge, "
                        "residual " +
                        std::to_string(res.residual));

    double delta = std::max(10.0 * res.residual * std::abs(rho),
                            1e-3 * std::abs(rho) + 1e-12);
    for (int attempt = 0; attempt < 60; ++attempt) {
      const double sigma = rho - delta;
      std::vector<double> b(n);
      for (int i = 0; i < n; ++i) b[i] = pc.mass[i] * x[i];
      if (cg_shifted(pc, sigma, b, y, 1e-10, 8 * n + 200)) {
        const double ny = mnorm(y);
        if (ny > 0.0 && std::isfinite(ny)) {
          for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
          break;
        }
      }
      delta *= 10.0;  // shift was above the spectrum floor; back off
      if (attempt == 59)
        throw SolverError("rayleigh_min: could not find an SPD shift");
    }
  }
  res.lambda_min = rho;
  res.eigenvector = std::move(x);
  return res;
}

}  // namespace

SpectrumResult rayleigh_min(const ScalarField& v, const Exponents& exp,
                            const Box& region, double tol, int max_outer) {
  const AxisymGrid& g = v.grid;
  PotentialData pot = potential_data_v(v, exp);

  // dof numbering over masked nodes inside the region
  std::vector<int> dof(g.size(), -1);
  std::vector<std::size_t> nodes;
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      if (v.mask[k] && region.contains(g.tau(i), g.z(j))) {
        dof[k] = static_cast<int>(nodes.size());
        nodes.push_back(k);
      }
    }

  Pencil pc;
  pc.n = static_cast<int>(nodes.size());
  pc.sdiag.assign(pc.n, 0.0);
  pc.pot.assign(pc.n, 0.0);
  pc.mass.assign(pc.n, 0.0);
  pc.nbr_ptr.assign(pc.n + 1, 0);

  auto rho_node = [&](std::size_t k, int i) {
    return g.weight(i) * std::pow(v.values[k], exp.alpha);
  };

  // edge accumulation: int rho |grad phi|^2 ~ sum_edges rho_edge (dphi)^2
  std::vector<std::vector<std::pair<int, double>>> adj(pc.n);
  const double h2 = g.h * g.h;
  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      const int dk = dof[k];
      const double rk = v.mask[k] ? rho_node(k, i) : 0.0;
      // edges to (i+1, j) and (i, j+1)
      const int di[2] = {i + 1, i};
      const int dj[2] = {j, j + 1};
      for (int e = 0; e < 2; ++e) {
        if (di[e] >= g.ntau || dj[e] >= g.nz) continue;
        const std::size_t k2 = g.index(di[e], dj[e]);
        const int dk2 = dof[k2];
        if (dk < 0 && dk2 < 0) continue;
        const double r2 = v.mask[k2] ? rho_node(k2, di[e]) : 0.0;
        const double w = 0.5 * (rk + r2);  // edge weight, area h^2 / h^2
        if (dk >= 0) pc.sdiag[dk] += w;
        if (dk2 >= 0) pc.sdiag[dk2] += w;
        if (dk >= 0 && dk2 >= 0) {
          adj[dk].push_back({dk2, -w});
          adj[dk2].push_back({dk, -w});
        }
      }
    }
  }
  for (int r = 0; r < pc.n; ++r) pc.nbr_ptr[r + 1] = pc.nbr_ptr[r] +
                                                     static_cast<int>(adj[r].size());
  pc.nbr_idx.resize(pc.nbr_ptr[pc.n]);
  pc.nbr_w.resize(pc.nbr_ptr[pc.n]);
  for (int r = 0; r < pc.n; ++r) {
    int p = pc.nbr_ptr[r];
    for (const auto& [c, w] : adj[r]) {
      pc.nbr_idx[p] = c;
      pc.nbr_w[p] = w;
      ++p;
    }
  }
  for (int r = 0; r < pc.n; ++r) {
    const std::size_t k = nodes[r];
    const int i = static_cast<int>(k / g.nz);
    pc.pot[r] = g.weight(i) * pot.w[k] * h2;
    pc.mass[r] = rho_node(k, i) * h2;
    if (!(pc.mass[r] > 0.0)) pc.mass[r] = 1e-300;  // degenerate weight guard
  }

  return inverse_iteration(pc, tol, max_outer);
}

SpectrumResult min_generalized_eigen_dense(const std::vector<double>& a,
                                           const std::vector<double>& b, int n,
                                           double tol, int max_outer) {
  // pack the dense pencil into the sparse container
  Pencil pc;
  pc.n = n;
  pc.sdiag.assign(n, 0.0);
  pc.pot.assign(n, 0.0);
  pc.mass.assign(n, 0.0);
  pc.nbr_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    pc.sdiag[i] = a[static_cast<std::size_t>(i) * n + i];
    pc.mass[i] = b[static_cast<std::size_t>(i) * n + i];
    pc.nbr_ptr[i + 1] = pc.nbr_ptr[i] + (n - 1);
  }
  pc.nbr_idx.resize(pc.nbr_ptr[n]);
  pc.nbr_w.resize(pc.nbr_ptr[n]);
  for (int i = 0; i < n; ++i) {
    int p = pc.nbr_ptr[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      pc.nbr_idx[p] = j;
      pc.nbr_w[p] = a[static_cast<std::size_t>(i) * n + j];
      ++p;
    }
  }
  return inverse_iteration(pc, tol, max_outer);
}

AxisymCheck axisym_quad_form(const ScalarField& v, const Exponents& exp,
                             const std::function<double(double, double)>& eta,
                             const std::function<Vec2(double, double)>& grad_eta,
                             double tol) {
  const AxisymGrid& g = v.grid;
  const ScalarField vt = v_tau_field(v);

  std::vector<double> dl(g.size(), 0.0), dr(g.size(), 0.0);
  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      if (!v.mask[k]) continue;
      const double t = g.tau(i), zz = g.z(j);
      const double va = std::pow(v.values[k], exp.alpha);
      const double w2 = vt.values[k] * vt.values[k];
      const double e = eta(t, zz);
      const Vec2 ge = grad_eta(t, zz);
      if (t > 0.0) dl[k] = (exp.n - 2) * va * w2 / (t * t) * e * e;
      dr[k] = va * w2 * dot(ge, ge);
    }
  }
  FbSingularity fb{&v.values, exp.alpha};
  const FbSingularity* fbp = exp.alpha < 2.0 ? &fb : nullptr;
  AxisymCheck out;
  out.lhs = integrate_masked(g, dl, v.mask, fbp);
  out.rhs = integrate_masked(g, dr, v.mask, fbp);
  out.stable = out.lhs <= out.rhs + tol;
  return out;
}

ThetaWindow theta_window(int n, double alpha) {
  if (n < 3) throw std::domain_error("theta_window: needs n >= 3");
  if (alpha < 0.0) throw std::domain_error("theta_window: alpha must be >= 0");
  ThetaWindow w;
  w.n = n;
  w.alpha = alpha;
  w.lower = n + alpha - 2.0;
  w.lambda = std::sqrt(n - 2.0);
  w.upper = 2.0 * w.lambda;
  w.feasible = w.lower < w.upper;
  if (alpha <= 1.0) {
    const double s = std::sqrt(1.0 - alpha);
    w.n_lower = 2.0 + (1.0 - s) * (1.0 - s);
    w.n_upper = 2.0 + (1.0 + s) * (1.0 + s);
    w.real_roots = true;
  } else {
    w.n_lower = w.n_upper = std::numeric_limits<double>::quiet_NaN();
    w.real_roots = false;  // lambda^2 - 2 lambda + alpha has no real roots
    w.feasible = false;
  }
  return w;
}

namespace {
double zeta_cut(double r, double radius) {
  if (r <= radius) return 1.0;
  if (r >= 2.0 * radius) return 0.0;
  const double s = (r - radius) / radius;
  return 1.0 - s * s * (3.0 - 2.0 * s);
}
double zeta_cut_d(double r, double radius) {
  if (r <= radius || r >= 2.0 * radius) return 0.0;
  const double s = (r - radius) / radius;
  return -6.0 * s * (1.0 - s) / radius;
}
}  // namespace

double ThetaTestFunction::value(double tau, double z) const {
  const double r = std::hypot(tau, z);
  const double f =
      tau > eps ? std::pow(tau, -0.5 * theta) : std::pow(eps, -0.5 * theta);
  return f * zeta_cut(r, radius);
}

Vec2 ThetaTestFunction::grad(double tau, double z) const {
  const double r = std::hypot(tau, z);
  const double f =
      tau > eps ? std::pow(tau, -0.5 * theta) : std::pow(eps, -0.5 * theta);
  const double fp =
      tau > eps ? -0.5 * theta * std::pow(tau, -0.5 * theta - 1.0) : 0.0;
  const double zc = zeta_cut(r, radius);
  const double zd = zeta_cut_d(r, radius);
  if (r == 0.0) return {fp * zc, 0.0};
  return {fp * zc + f * zd * tau / r, f * zd * z / r};
}

double ThetaTestFunction::split_theta_part(double tau, double z) const {
  if (tau <= eps) return 0.0;
  const double r = std::hypot(tau, z);
  const double zc = zeta_cut(r, radius);
  return (1.0 + delta) * 0.25 * theta * theta *
         std::pow(tau, -theta - 2.0) * zc * zc;
}

double ThetaTestFunction::split_cutoff_part(double tau, double z) const {
  const double r = std::hypot(tau, z);
  const double f =
      tau > eps ? std::pow(tau, -0.5 * theta) : std::pow(eps, -0.5 * theta);
  const double zd = zeta_cut_d(r, radius);
  return (1.0 + 1.0 / delta) * f * f * zd * zd;
}

ThetaTestSamples build_theta_test(double theta, double eps, double radius,
                                  const AxisymGrid& grid, double delta) {
  if (!(eps > 0.0 && eps < 1.0) || !(radius >= 1.0))
    throw std::domain_error("build_theta_test: need 0 < eps < 1 <= R");
  ThetaTestSamples s;
  s.fn = ThetaTestFunction{theta, eps, radius, delta};
  s.eta.resize(grid.size());
  s.grad_sq.resize(grid.size());
  s.split_theta.resize(grid.size());
  s.split_cutoff.resize(grid.size());
  for (int i = 0; i < grid.ntau; ++i)
    for (int j = 0; j < grid.nz; ++j) {
      const double t = grid.tau(i), z = grid.z(j);
      const std::size_t k = grid.index(i, j);
      s.eta[k] = s.fn.value(t, z);
      const Vec2 gv = s.fn.grad(t, z);
      s.grad_sq[k] = dot(gv, gv);
      s.split_theta[k] = s.fn.split_theta_part(t, z);
      s.split_cutoff[k] = s.fn.split_cutoff_part(t, z);
    }
  return s;
}

CurvatureReport curvature_check(const RadialProfile& p) {
  CurvatureReport rep;
  const int n = p.exp.n;
  const double alpha = p.exp.alpha;
  rep.mean_curvature = (n - 1.0) / p.r0;

  // geometric ladder of offsets; v'' from the dense-output derivative of v'
  std::vector<double> svals, lap, vpp;
  for (int k = 0; k < 8; ++k) {
    const double s = 1e-2 * p.r0 / double(1 << k);
    if (s <= 2.0 * p.series_offset) break;
    const double r = p.r0 + s;
    double y[2], dy[2];
    p.sol.eval(r, y);
    p.sol.eval_derivative(r, dy);
    const double vpp_r = dy[1];
    svals.push_back(s);
    vpp.push_back(vpp_r);
    lap.push_back(vpp_r + (n - 1.0) * y[1] / r);
  }
  const int m = static_cast<int>(svals.size());
  if (m < 4)
    throw SolverError("curvature_check: trajectory too short to extrapolate");

  // quadratic least squares y = c0 + c1 s + c2 s^2; the intercept
  // extrapolates s -> 0
  auto intercept = [&](const std::vector<double>& y) {
    double a[3][3] = {};
    double b[3] = {};
    for (int i = 0; i < m; ++i) {
      const double row[3] = {1.0, svals[i], svals[i] * svals[i]};
      for (int r = 0; r < 3; ++r) {
        b[r] += row[r] * y[i];
        for (int c = 0; c < 3; ++c) a[r][c] += row[r] * row[c];
      }
    }
    // 3x3 Gauss with partial pivoting
    int perm[3] = {0, 1, 2};
    for (int c = 0; c < 3; ++c) {
      int piv = c;
      for (int r = c + 1; r < 3; ++r)
        if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
      std::swap(a[c], a[piv]);
      std::swap(b[c], b[piv]);
      std::swap(perm[c], perm[piv]);
      for (int r = c + 1; r < 3; ++r) {
        const double f = a[r][c] / a[c][c];
        for (int q = c; q < 3; ++q) a[r][q] -= f * a[c][q];
        b[r] -= f * b[c];
      }
    }
    double x[3];
    for (int r = 2; r >= 0; --r) {
      double s = b[r];
      for (int q = r + 1; q < 3; ++q) s -= a[r][q] * x[q];
      x[r] = s / a[r][r];
    }
    return x[0];
  };
  // extrapolation assumes a clean ladder: successive second differences of
  // v'' must not oscillate
  for (int i = 0; i + 2 < m; ++i) {
    const double d1 = vpp[i + 1] - vpp[i];
    const double d2 = vpp[i + 2] - vpp[i + 1];
    if (d1 != 0.0 && d2 != 0.0 && std::signbit(d1) != std::signbit(d2) &&
        std::abs(d2) > 0.75 * std::abs(d1))
      throw SolverError("curvature_check: non-monotone extrapolation tail");
  }

  rep.vpp_extrapolated = intercept(vpp);
  rep.laplacian_limit = intercept(lap);

  const double scale =
      std::max(std::abs(alpha * rep.vpp_extrapolated), 1e-6 * rep.mean_curvature);
  rep.gap_laplacian =
      std::abs(rep.laplacian_limit + alpha * rep.vpp_extrapolated) / scale;
  const double h_from_v = -(1.0 + alpha) * rep.vpp_extrapolated;
  rep.gap_curvature =
      std::abs(rep.mean_curvature - h_from_v) / rep.mean_curvature;
  rep.sign_consistent = h_from_v > 0.0;
  return rep;
}

std::vector<AlphaLimitRow> limit_alpha_zero(
    int n, double r0, double r_max, const std::vector<double>& alphas,
    const std::function<double(double)>& phi, double tol) {
  std::vector<AlphaLimitRow> rows;
  const double H = (n - 1.0) / r0;
  for (double alpha : alphas) {
    const Exponents e = exponents_from_alpha(alpha, n);
    const RadialProfile p = radial_profile(e, r0, r_max, tol);

    // integrand f(s) = (alpha/2) v^(alpha-1) (1-v'^2)/v phi^2 r^(n-1),
    // s = r - r0; v^(alpha-1) ~ s^(alpha-1) is the only singular factor.
    auto bounded = [&](double s) {
      const double r = r0 + s;
      const double vv = p.v(r);
      const double dv = p.dv(r);
      const double ph = phi(r);
      return 0.5 * alpha * ((1.0 - dv) * (1.0 + dv) / vv) * ph * ph *
             std::pow(r, n - 1.0);
    };
    // head [0, delta]: two-term series of the bounded factor against s^(a-1)
    const double delta = 1e-6 * r0;
    auto gfac = [&](double s) {
      return bounded(s) * std::pow(p.v(r0 + s), alpha - 1.0) *
             std::pow(s, 1.0 - alpha);  // = f(s) * s^(1-alpha), smooth-ish
    };
    const double g1 = gfac(delta), g2 = gfac(2.0 * delta);
    const double c0 = 2.0 * g1 - g2;  // linear extrapolation to s = 0
    const double c1 = (g2 - g1) / delta;
    double head = c0 * std::pow(delta, alpha) / alpha +
                  c1 * std::pow(delta, alpha + 1.0) / (alpha + 1.0);

    // tail: trapezoid in log s of s * f(s)
    const int npts = 20000;
    const double l0 = std::log(delta), l1 = std::log(r_max - r0);
    double tail = 0.0;
    double prev = 0.0;
    for (int i = 0; i < npts; ++i) {
      const double ls = l0 + (l1 - l0) * i / (npts - 1.0);
      const double s = std::exp(ls);
      const double val =
          bounded(s) * std::pow(p.v(r0 + s), alpha - 1.0) * s;
      if (i > 0) tail += 0.5 * (prev + val) * (l1 - l0) / (npts - 1.0);
      prev = val;
    }

    AlphaLimitRow row;
    row.alpha = alpha;
    row.potential_integral = head + tail;
    row.target = H * phi(r0) * phi(r0) * std::pow(r0, n - 1.0) / (1.0 + alpha);
    row.gap = std::abs(row.potential_integral - row.target);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace apfb
