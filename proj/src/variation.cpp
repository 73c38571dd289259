#include "apfb/variation.hpp"

#include <algorithm>
#include <cmath>

#include "apfb/io.hpp"

namespace apfb {

std::vector<double> VariationSpec::default_ladder(double eps0, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = eps0 / double(1 << i);
  return out;
}

namespace {

// Cubic Lagrange weights for target s in node units relative to the stencil
// start (nodes at 0,1,2,3).
void lagrange4(double s, double w[4], double dw[4]) {
  const double s1 = s - 1.0, s2 = s - 2.0, s3 = s - 3.0;
  w[0] = -(s1 * s2 * s3) / 6.0;
  w[1] = (s * s2 * s3) / 2.0;
  w[2] = -(s * s1 * s3) / 2.0;
  w[3] = (s * s1 * s2) / 6.0;
  if (dw) {
    dw[0] = -((s1 * s2) + (s1 * s3) + (s2 * s3)) / 6.0;
    dw[1] = ((s * s2) + (s * s3) + (s2 * s3)) / 2.0;
    dw[2] = -((s * s1) + (s * s3) + (s1 * s3)) / 2.0;
    dw[3] = ((s * s1) + (s * s2)) / 6.0 + (s1 * s2) / 6.0;
  }
}

struct InterpResult {
  double value = 0.0;
  Vec2 grad;  // of the interpolant
};

// Tensor cubic Lagrange interpolation with even reflection across tau = 0
// and value clamping to the stencil range.
InterpResult interp_cubic(const ScalarField& f, double tau, double z) {
  const AxisymGrid& g = f.grid;
  double sign_tau = 1.0;
  if (tau < 0.0) {
    tau = -tau;  // even reflection; d/dtau flips sign
    sign_tau = -1.0;
  }
  const double xi = tau / g.h;
  const double zj = (z - g.z_min) / g.h;

  int i0 = static_cast<int>(std::floor(xi)) - 1;
  int j0 = static_cast<int>(std::floor(zj)) - 1;
  i0 = std::clamp(i0, 0, g.ntau - 4);
  j0 = std::clamp(j0, 0, g.nz - 4);

  double wi[4], dwi[4], wj[4], dwj[4];
  lagrange4(xi - i0, wi, dwi);
  lagrange4(zj - j0, wj, dwj);

  double val = 0.0, dt = 0.0, dz = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const double fv = f.value(i0 + a, j0 + b);
      lo = std::min(lo, fv);
      hi = std::max(hi, fv);
      val += wi[a] * wj[b] * fv;
      dt += dwi[a] * wj[b] * fv;
      dz += wi[a] * dwj[b] * fv;
    }
  }
  InterpResult out;
  out.value = std::clamp(val, lo, hi);
  out.grad = {sign_tau * dt / g.h, dz / g.h};
  return out;
}

}  // namespace

ScalarField pullback(const ScalarField& w, const VariationSpec& spec,
                     double eps) {
  const AxisymGrid& g = w.grid;
  const VectorFieldSpec& vf = spec.field;

  if (!(vf.support.tau_hi < g.tau_max - 0.5 * g.h &&
        vf.support.z_lo > g.z_min + 0.5 * g.h &&
        vf.support.z_hi < g.z_max - 0.5 * g.h))
    throw ValidationError("pullback: support box must lie inside the grid");

  // invertibility check |eps DPhi| < 1/2 over the support box
  double dmax = 0.0;
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nz; ++j) {
      const double t = g.tau(i), zz = g.z(j);
      if (!vf.support.contains(t, zz)) continue;
      const Mat2 m = vf.dphi(t, zz);
      dmax = std::max(dmax, std::max(std::abs(m.tt) + std::abs(m.tz),
                                     std::abs(m.zt) + std::abs(m.zz)));
    }
  if (std::abs(eps) * dmax >= 0.5)
    throw ValidationError("pullback: eps outside the invertibility bound");

  ScalarField out;
  out.grid = g;
  out.values.assign(g.size(), 0.0);
  out.mask.assign(g.size(), 0);
  out.grad.assign(g.size(), Vec2{});

  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      const double ty = g.tau(i), zy = g.z(j);
      // fixed point x <- y - eps Phi(x); immediate where Phi vanishes
      double xt = ty, xz = zy;
      double step = 0.0;
      bool converged = false;
      double prev_step = std::numeric_limits<double>::infinity();
      for (int it = 0; it < 100; ++it) {
        const Vec2 p = vf.phi(xt, xz);
        const double nt = ty - eps * p.tau;
        const double nz = zy - eps * p.z;
        step = std::max(std::abs(nt - xt), std::abs(nz - xz));
        xt = nt;
        xz = nz;
        if (step <= 1e-15 * (1.0 + std::abs(xt) + std::abs(xz))) {
          converged = true;
          break;
        }
        if (it > 4 && step > prev_step * 1.5)
          throw SolverError("pullback: fixed point is not contracting");
        prev_step = step;
      }
      if (!converged)
        throw SolverError("pullback: fixed point failed to converge");

      const InterpResult s = interp_cubic(w, xt, xz);
      // chain rule for the competitor: (I + eps DPhi(x*))^{-T} grad S(x*)
      const Mat2 m = vf.dphi(xt, xz);
      const double a11 = 1.0 + eps * m.tt, a12 = eps * m.tz;
      const double a21 = eps * m.zt, a22 = 1.0 + eps * m.zz;
      const double det = a11 * a22 - a12 * a21;
      const Vec2 tg{(a22 * s.grad.tau - a21 * s.grad.z) / det,
                    (-a12 * s.grad.tau + a11 * s.grad.z) / det};

      const double val = std::max(0.0, s.value);
      out.values[k] = val;
      out.mask[k] = val > 0.0 ? 1 : 0;
      out.grad[k] = out.mask[k] ? tg : Vec2{};
    }
  }
  return out;
}

ExpansionFit fit_expansion(const std::vector<double>& eps,
                           const std::vector<double>& energies) {
  const int m = static_cast<int>(eps.size());
  if (m < 5 || energies.size() != eps.size())
    throw ValidationError("fit_expansion: need at least 5 ladder points");

  const double emax = *std::max_element(eps.begin(), eps.end());
  constexpr int kCols = 4;
  std::vector<double> q(m * kCols);
  for (int r = 0; r < m; ++r) {
    const double x = eps[r] / emax;
    q[r * kCols + 0] = 1.0;
    q[r * kCols + 1] = x;
    q[r * kCols + 2] = x * x;
    q[r * kCols + 3] = x * x * x;
  }
  // modified Gram-Schmidt QR
  double rdiag[kCols] = {};
  double rmat[kCols][kCols] = {};
  for (int c = 0; c < kCols; ++c) {
    for (int p = 0; p < c; ++p) {
      double s = 0.0;
      for (int r = 0; r < m; ++r) s += q[r * kCols + p] * q[r * kCols + c];
      rmat[p][c] = s;
      for (int r = 0; r < m; ++r) q[r * kCols + c] -= s * q[r * kCols + p];
    }
    double nrm = 0.0;
    for (int r = 0; r < m; ++r)
      nrm += q[r * kCols + c] * q[r * kCols + c];
    nrm = std::sqrt(nrm);
    rdiag[c] = nrm;
    if (nrm < 1e-13) throw SolverError("fit_expansion: rank-deficient design");
    for (int r = 0; r < m; ++r) q[r * kCols + c] /= nrm;
  }
  double qtb[kCols] = {};
  for (int c = 0; c < kCols; ++c)
    for (int r = 0; r < m; ++r) qtb[c] += q[r * kCols + c] * energies[r];
  // back substitution: R x = Q^T b, R has rdiag on the diagonal
  double coef[kCols];
  for (int c = kCols - 1; c >= 0; --c) {
    double s = qtb[c];
    for (int p = c + 1; p < kCols; ++p) s -= rmat[c][p] * coef[p];
    coef[c] = s / rdiag[c];
  }

  ExpansionFit fit;
  fit.e0 = coef[0];
  fit.e1 = coef[1] / emax;
  fit.e2 = coef[2] / (emax * emax);
  fit.e3 = coef[3] / (emax * emax * emax);
  double rss = 0.0;
  for (int r = 0; r < m; ++r) {
    const double model = fit.e0 + fit.e1 * eps[r] +
                         fit.e2 * eps[r] * eps[r] +
                         fit.e3 * eps[r] * eps[r] * eps[r];
    rss += (model - energies[r]) * (model - energies[r]);
  }
  fit.residual = std::sqrt(rss / m);
  fit.condition = rdiag[0] / rdiag[kCols - 1];
  return fit;
}

VerifyReport verify_expansion(const ScalarField& w, const GeneralEnergySpec& s,
                              const VariationSpec& spec) {
  VerifyReport rep;
  rep.h = w.grid.h;
  rep.ladder =
      spec.ladder.empty() ? VariationSpec::default_ladder() : spec.ladder;
  rep.energies.reserve(rep.ladder.size());
  for (double eps : rep.ladder) {
    const ScalarField we = pullback(w, spec, eps);
    rep.energies.push_back(general_energy(we, s).total);
  }
  rep.fitted = fit_expansion(rep.ladder, rep.energies);
  rep.closed_e1 = first_variation(w, s, spec.field);
  rep.closed_e2 = second_variation_closed_form(w, s, spec.field);

  const double e0 = general_energy(w, s).total;
  const double floor1 = 1e-12 * std::max(1.0, std::abs(e0));
  rep.rel_gap_e1 = std::abs(rep.fitted.e1 - rep.closed_e1) /
                   std::max(std::abs(rep.closed_e1), floor1);
  rep.rel_gap_e2 = std::abs(rep.fitted.e2 - rep.closed_e2) /
                   std::max(std::abs(rep.closed_e2), floor1);
  return rep;
}

SmallMat SmallMat::identity(int n) {
  SmallMat m;
  m.n = n;
  m.a.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

double det(const SmallMat& m) {
  SmallMat lu = m;
  const int n = m.n;
  double d = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(lu.at(r, c)) > std::abs(lu.at(piv, c))) piv = r;
    if (piv != c) {
      for (int q = 0; q < n; ++q) std::swap(lu.at(c, q), lu.at(piv, q));
      d = -d;
    }
    const double p = lu.at(c, c);
    if (p == 0.0) return 0.0;
    d *= p;
    for (int r = c + 1; r < n; ++r) {
      const double f = lu.at(r, c) / p;
      for (int q = c; q < n; ++q) lu.at(r, q) -= f * lu.at(c, q);
    }
  }
  return d;
}

double trace(const SmallMat& m) {
  double t = 0.0;
  for (int i = 0; i < m.n; ++i) t += m.at(i, i);
  return t;
}

double trace_sq(const SmallMat& m) {
  double t = 0.0;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) t += m.at(i, j) * m.at(j, i);
  return t;
}

ExpansionCheck det_expansion(const SmallMat& a, double eps) {
  SmallMat m = SmallMat::identity(a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) m.at(i, j) += eps * a.at(i, j);
  ExpansionCheck out;
  out.exact = det(m);
  const double tr = trace(a);
  out.truncated = 1.0 + eps * tr + 0.5 * eps * eps * (tr * tr - trace_sq(a));
  out.error = out.exact - out.truncated;
  return out;
}

ExpansionCheck normsq_expansion(const SmallMat& a, const SmallMat& b,
                                const std::vector<double>& q, double eps) {
  const int n = a.n;
  ExpansionCheck out;
  std::vector<double> mtq(n, 0.0);
  // M^T q with M = I + eps A + eps^2 B
  for (int i = 0; i < n; ++i) {
    double s = q[i];
    for (int r = 0; r < n; ++r)
      s += (eps * a.at(r, i) + eps * eps * b.at(r, i)) * q[r];
    mtq[i] = s;
  }
  for (double x : mtq) out.exact += x * x;

  double q2 = 0.0, qaq = 0.0, qbq = 0.0, atq2 = 0.0;
  for (int i = 0; i < n; ++i) {
    q2 += q[i] * q[i];
    double aq = 0.0, bq = 0.0, atq = 0.0;
    for (int j = 0; j < n; ++j) {
      aq += a.at(i, j) * q[j];
      bq += b.at(i, j) * q[j];
      atq += a.at(j, i) * q[j];
    }
    qaq += q[i] * aq;
    qbq += q[i] * bq;
    atq2 += atq * atq;
  }
  out.truncated = q2 + 2.0 * eps * qaq + eps * eps * (atq2 + 2.0 * qbq);
  out.error = out.exact - out.truncated;
  return out;
}

}  // namespace apfb
