#include "apfb/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace apfb {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------------------
// 1D profile

double OneDProfile::u_at(double t) const {
  return t <= 0.0 ? 0.0 : std::pow(t / exp.beta, exp.beta);
}

double OneDProfile::du_at(double t) const {
  return t <= 0.0 ? 0.0 : std::pow(t / exp.beta, exp.beta - 1.0);
}

double OneDProfile::ddu_at(double t) const {
  if (t <= 0.0) return 0.0;
  return (exp.beta - 1.0) / exp.beta * std::pow(t / exp.beta, exp.beta - 2.0);
}

OneDProfile one_d_profile(const Exponents& exp, const Grid1D& grid) {
  OneDProfile p;
  p.exp = exp;
  p.grid = grid;
  p.u.resize(grid.m);
  p.du.resize(grid.m);
  for (int i = 0; i < grid.m; ++i) {
    p.u[i] = p.u_at(grid.t(i));
    p.du[i] = p.du_at(grid.t(i));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Radial profile

namespace {

OdeRhs radial_rhs(const Exponents& e) {
  const double nm1 = e.n - 1.0;
  const double a2 = e.alpha / 2.0;
  return [nm1, a2](double r, const double* y, double* dy) {
    dy[0] = y[1];
    const double one_minus = (1.0 - y[1]) * (1.0 + y[1]);  // 1 - v'^2, unsplit
    dy[1] = -nm1 * y[1] / r + (a2 == 0.0 ? 0.0 : a2 * one_minus / y[0]);
  };
}

// Max dense-output defect |y'_interp - f(t, y_interp)| over step interiors.
double measure_defect(const OdeSolution& sol, const OdeRhs& rhs) {
  double worst = 0.0;
  double y[2], dy[2], f[2];
  for (const DenseStep& s : sol.steps) {
    for (double th : {0.25, 0.5, 0.75}) {
      const double t = s.t0 + th * s.dt;
      sol.eval(t, y);
      sol.eval_derivative(t, dy);
      rhs(t, y, f);
      worst = std::max(worst, std::max(std::abs(dy[0] - f[0]),
                                       std::abs(dy[1] - f[1])));
    }
  }
  return worst;
}

}  // namespace

RadialProfile radial_profile(const Exponents& exp, double r0, double r_max,
                             double tol) {
  if (!(r0 > 0.0) || !(r_max > r0))
    throw std::domain_error("radial_profile: need 0 < r0 < r_max");
  if (!(tol > 0.0)) throw std::domain_error("radial_profile: tol must be > 0");

  RadialProfile p;
  p.exp = exp;
  p.r0 = r0;
  p.r_max = r_max;
  p.tol = tol;

  const double a = -(exp.n - 1.0) / (2.0 * (1.0 + exp.alpha) * r0);
  p.vpp_r0 = 2.0 * a;
  const double s0 = 1e-5 * r0;
  p.series_offset = s0;
  const double y0[2] = {s0 + a * s0 * s0, 1.0 + 2.0 * a * s0};

  OdeOptions opts;
  opts.rtol = std::min(1e-10, 0.01 * tol);
  opts.atol = opts.rtol * 1e-2;
  opts.h_init = 10.0 * s0;
  opts.h_max = 0.05 * (r_max - r0);

  OdeEvent degenerate = [](double, const double* y) { return y[1]; };
  OdeResult r = integrate_ode(radial_rhs(exp), r0 + s0, y0, r_max, opts,
                              &degenerate);
  if (r.event_hit)
    throw SolverError("radial_profile: profile degenerates (v' = 0) at r=" +
                      std::to_string(r.t_event));
  p.sol = std::move(r.sol);
  p.max_defect = measure_defect(p.sol, radial_rhs(exp));
  return p;
}

double RadialProfile::v(double r) const {
  if (r <= r0) return 0.0;
  const double s = r - r0;
  if (r < r0 + series_offset) {
    const double a = 0.5 * vpp_r0;
    return s + a * s * s;
  }
  return sol.eval1(r, 0);
}

double RadialProfile::dv(double r) const {
  if (r <= r0) return 0.0;
  const double s = r - r0;
  if (r < r0 + series_offset) return 1.0 + vpp_r0 * s;
  return sol.eval1(r, 1);
}

double RadialProfile::ddv(double r) const {
  if (r <= r0) return 0.0;
  if (r < r0 + series_offset) return vpp_r0;
  double y[2], dy[2];
  sol.eval(r, y);
  radial_rhs(exp)(r, y, dy);
  return dy[1];
}

// ---------------------------------------------------------------------------
// Cone profile

namespace {

OdeRhs cone_rhs(const Exponents& e) {
  const double nm2 = e.n - 2.0;
  const double nm1 = e.n - 1.0;
  const double a2 = e.alpha / 2.0;
  return [nm2, nm1, a2](double th, const double* y, double* dy) {
    dy[0] = y[1];
    const double cot = std::cos(th) / std::sin(th);
    const double one_minus = 1.0 - y[0] * y[0] - y[1] * y[1];
    dy[1] = -nm2 * cot * y[1] - nm1 * y[0] +
            (a2 == 0.0 ? 0.0 : a2 * one_minus / y[0]);
  };
}

constexpr double kBlowup2 = 2500.0;  // divergence bound on h^2 + h'^2

}  // namespace

double ConeProfile::h_at(double theta) const {
  if (theta <= sol.t_begin)
    return h0 + 0.5 * hpp0 * theta * theta;  // even series about the axis
  if (theta > sol.t_end) {
    // linear continuation beyond the stop event, clipped at zero
    const double he = sol.eval1(sol.t_end, 0);
    const double we = sol.eval1(sol.t_end, 1);
    return std::max(0.0, he + we * (theta - sol.t_end));
  }
  return sol.eval1(theta, 0);
}

double ConeProfile::dh_at(double theta) const {
  if (theta <= sol.t_begin) return hpp0 * theta;
  if (theta > sol.t_end) theta = sol.t_end;
  return sol.eval1(theta, 1);
}

ConeShot cone_shoot(const Exponents& exp, double h0, double tol) {
  if (!(h0 > 0.0)) throw std::domain_error("cone_shoot: h0 must be > 0");
  if (exp.n < 3) throw std::domain_error("cone_shoot: needs n >= 3");

  const double h_stop = 1e-6;
  // axis regularization: cot term replaced by its limit gives
  // n h''(0) = (alpha/2)(1-h0^2)/h0 - (n-1) h0, solved for h''(0) with the
  // even two-term series h = h0 + h''(0) theta^2 / 2.
  const double rhs0 =
      0.5 * exp.alpha * (1.0 - h0 * h0) / h0 - (exp.n - 1.0) * h0;
  const double hpp0 = rhs0 / (exp.n - 1.0);

  const double ts = 1e-4;
  const double y0[2] = {h0 + 0.5 * hpp0 * ts * ts, hpp0 * ts};

  OdeOptions opts;
  opts.rtol = std::min(1e-11, 1e-3 * tol);
  opts.atol = 1e-14;
  opts.h_init = 10.0 * ts;
  opts.h_max = 0.02;

  OdeEvent stop = [h_stop](double, const double* y) {
    const double speed2 = y[0] * y[0] + y[1] * y[1];
    if (speed2 > kBlowup2) return 0.0;  // force a halt; classified below
    return y[0] - h_stop;
  };

  // the polar axis theta = pi is itself singular (cot blows up), so "stays
  // positive through the interval" is declared a little before it
  const double theta_end = kPi - std::max(tol, 5e-3);
  OdeResult r = integrate_ode(cone_rhs(exp), ts, y0, theta_end, opts, &stop);

  ConeShot shot;
  if (!r.event_hit) {
    shot.outcome = ConeOutcome::NoFreeBoundary;
    return shot;
  }
  const double h_ev = r.y_event[0];
  const double w_ev = r.y_event[1];
  if (h_ev * h_ev + w_ev * w_ev > 0.5 * kBlowup2) {
    // a trajectory that kept h positive almost to the pole and then got
    // swept up by the cot term never produced a free boundary
    if (h_ev > 10.0 * h_stop && r.t_event > kPi - 0.05) {
      shot.outcome = ConeOutcome::NoFreeBoundary;
      return shot;
    }
    throw SolverError("cone_shoot: |grad v| blow-up at theta=" +
                      std::to_string(r.t_event));
  }

  ConeProfile cone;
  cone.exp = exp;
  cone.h0 = h0;
  cone.hpp0 = hpp0;
  cone.h_stop = h_stop;
  cone.tol = tol;
  // normal-form extrapolation: near the free boundary the profile matches
  // the 1D solution, h ~ |h'| (theta0 - theta)
  cone.theta0 = r.t_event + (w_ev < 0.0 ? h_ev / (-w_ev) : 0.0);
  cone.m = w_ev + std::sqrt(std::max(0.0, 1.0 - h_ev * h_ev));
  cone.sol = std::move(r.sol);
  shot.outcome = ConeOutcome::Crossing;
  shot.profile = std::move(cone);
  return shot;
}

ConeProfile cone_solve(const Exponents& exp, double h0_lo, double h0_hi,
                       double tol) {
  auto mismatch = [&](double h0) -> std::optional<double> {
    ConeShot s = cone_shoot(exp, h0, tol);
    if (s.outcome != ConeOutcome::Crossing) return std::nullopt;
    return s.profile->m;
  };
  auto mlo = mismatch(h0_lo);
  auto mhi = mismatch(h0_hi);
  if (!mlo || !mhi || std::signbit(*mlo) == std::signbit(*mhi))
    throw ValidationError("cone_solve: bracket has no sign change");

  double lo = h0_lo, hi = h0_hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto mm = mismatch(mid);
    if (!mm)
      throw SolverError("cone_solve: crossing lost inside bracket");
    if (std::abs(*mm) <= tol || hi - lo < 1e-15 * hi) {
      ConeShot s = cone_shoot(exp, mid, tol);
      return std::move(*s.profile);
    }
    if (std::signbit(*mm) == std::signbit(*mlo))
      lo = mid;
    else
      hi = mid;
  }
  throw SolverError("cone_solve: bisection did not reach |m| <= tol");
}

ConeScanResult cone_scan(const Exponents& exp, double h0_lo, double h0_hi,
                         int count, double tol, int threads) {
  if (count < 2 || !(h0_lo > 0.0) || !(h0_hi > h0_lo))
    throw std::domain_error("cone_scan: bad scan range");

  std::vector<double> h0s(count);
  const double lf = std::log(h0_lo), lr = std::log(h0_hi / h0_lo);
  for (int i = 0; i < count; ++i)
    h0s[i] = std::exp(lf + lr * i / (count - 1.0));

  ConeScanResult res;
  res.entries.resize(count);

  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      ConeScanEntry e;
      e.h0 = h0s[i];
      try {
        ConeShot s = cone_shoot(exp, h0s[i], tol);
        if (s.outcome == ConeOutcome::Crossing) {
          e.kind = ConeScanEntry::Kind::Crossing;
          e.theta0 = s.profile->theta0;
          e.m = s.profile->m;
        } else {
          e.kind = ConeScanEntry::Kind::NoFreeBoundary;
        }
      } catch (const SolverError&) {
        e.kind = ConeScanEntry::Kind::Diverged;
      }
      res.entries[i] = e;
    }
  };

  const int nwork = std::max(1, std::min(threads, count));
  if (nwork == 1) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (count + nwork - 1) / nwork;
    for (int w = 0; w < nwork; ++w)
      pool.emplace_back(work, w * chunk, std::min(count, (w + 1) * chunk));
    for (auto& th : pool) th.join();
  }

  // a trajectory that barely grazes the stop level exits with slope near
  // zero, so the mismatch tends to +1 at a bounce/crossing edge; a root can
  // therefore hide between such an edge and a negative-m crossing. Bisect
  // the classification edge first, then bracket against it.
  auto edge_crossing_h0 = [&](double h_nfb, double h_x) -> std::optional<double> {
    double lo = h_nfb, hi = h_x;
    for (int it = 0; it < 60; ++it) {
      const double mid = std::sqrt(lo * hi);
      try {
        ConeShot s = cone_shoot(exp, mid, tol);
        (s.outcome == ConeOutcome::Crossing ? hi : lo) = mid;
      } catch (const SolverError&) {
        return std::nullopt;
      }
    }
    return hi;
  };

  for (int i = 0; i + 1 < count; ++i) {
    const auto& a = res.entries[i];
    const auto& b = res.entries[i + 1];
    const bool ax = a.kind == ConeScanEntry::Kind::Crossing;
    const bool bx = b.kind == ConeScanEntry::Kind::Crossing;
    try {
      if (ax && bx) {
        if (a.m == 0.0) continue;  // exact grid hit, collected below
        if (std::signbit(a.m) == std::signbit(b.m)) continue;
        res.cones.push_back(cone_solve(exp, a.h0, b.h0, tol));
      } else if (!ax && bx && b.m < 0.0 &&
                 a.kind == ConeScanEntry::Kind::NoFreeBoundary) {
        if (auto he = edge_crossing_h0(a.h0, b.h0))
          res.cones.push_back(cone_solve(exp, *he, b.h0, tol));
      } else if (ax && !bx && a.m < 0.0 &&
                 b.kind == ConeScanEntry::Kind::NoFreeBoundary) {
        if (auto he = edge_crossing_h0(b.h0, a.h0))
          res.cones.push_back(cone_solve(exp, a.h0, *he, tol));
      }
    } catch (const std::exception&) {
      // root lost to divergence or a failed bracket; keep scanning
    }
  }
  // exact grid hits
  for (const auto& e : res.entries)
    if (e.kind == ConeScanEntry::Kind::Crossing && e.m == 0.0) {
      ConeShot s = cone_shoot(exp, e.h0, tol);
      if (s.profile) res.cones.push_back(std::move(*s.profile));
    }
  std::sort(res.cones.begin(), res.cones.end(),
            [](const ConeProfile& x, const ConeProfile& y) {
              return x.h0 < y.h0;
            });
  return res;
}

bool cone_is_flat(const ConeProfile& cone, double tol) {
  return std::abs(cone.h0 - 1.0) <= tol &&
         std::abs(cone.theta0 - 0.5 * kPi) <= 10.0 * tol;
}

// ---------------------------------------------------------------------------
// Change of variables

ScalarField v_from_u(const ScalarField& u, const Exponents& exp) {
  ScalarField v;
  v.grid = u.grid;
  v.values.resize(u.values.size());
  v.mask = u.mask;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    const double uv = u.values[k];
    if (uv < 0.0) throw std::domain_error("v_from_u: negative input value");
    v.values[k] =
        u.mask[k] ? exp.beta * std::pow(uv, 1.0 / exp.beta) : 0.0;
  }
  if (u.has_gradient()) {
    v.grad.resize(u.grad.size());
    for (std::size_t k = 0; k < u.grad.size(); ++k) {
      if (!u.mask[k] || u.values[k] <= 0.0) continue;
      const double s = std::pow(u.values[k], -0.5 * exp.gamma);
      v.grad[k] = {u.grad[k].tau * s, u.grad[k].z * s};
    }
  }
  return v;
}

ScalarField u_from_v(const ScalarField& v, const Exponents& exp) {
  ScalarField u;
  u.grid = v.grid;
  u.values.resize(v.values.size());
  u.mask = v.mask;
  for (std::size_t k = 0; k < v.values.size(); ++k) {
    const double vv = v.values[k];
    if (vv < 0.0) throw std::domain_error("u_from_v: negative input value");
    u.values[k] =
        v.mask[k] ? std::pow(vv / exp.beta, exp.beta) : 0.0;
  }
  if (v.has_gradient()) {
    u.grad.resize(v.grad.size());
    for (std::size_t k = 0; k < v.grad.size(); ++k) {
      if (!v.mask[k] || v.values[k] <= 0.0) continue;
      const double s = std::pow(v.values[k] / exp.beta, 0.5 * exp.alpha);
      u.grad[k] = {v.grad[k].tau * s, v.grad[k].z * s};
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// tau-derivative field

ScalarField v_tau_field(const ScalarField& v) {
  const AxisymGrid& g = v.grid;
  ScalarField out;
  out.grid = g;
  out.values.assign(g.size(), 0.0);
  out.mask = v.mask;

  for (int j = 0; j < g.nz; ++j) {
    for (int i = 0; i < g.ntau; ++i) {
      if (!v.masked(i, j)) continue;
      double d;
      if (i == 0) {
        d = 0.0;  // odd symmetry of v_tau across the axis
      } else if (i == 1 && v.masked(0, j) && v.masked(2, j)) {
        d = (v.value(2, j) - v.value(0, j)) / (2.0 * g.h);
      } else {
        const bool lo = i > 0 && v.masked(i - 1, j);
        const bool hi = i + 1 < g.ntau && v.masked(i + 1, j);
        if (lo && hi)
          d = (v.value(i + 1, j) - v.value(i - 1, j)) / (2.0 * g.h);
        else if (hi && i + 2 < g.ntau && v.masked(i + 2, j))
          d = (-3.0 * v.value(i, j) + 4.0 * v.value(i + 1, j) -
               v.value(i + 2, j)) /
              (2.0 * g.h);
        else if (lo && i - 2 >= 0 && v.masked(i - 2, j))
          d = (3.0 * v.value(i, j) - 4.0 * v.value(i - 1, j) +
               v.value(i - 2, j)) /
              (2.0 * g.h);
        else if (hi)
          d = (v.value(i + 1, j) - v.value(i, j)) / g.h;
        else if (lo)
          d = (v.value(i, j) - v.value(i - 1, j)) / g.h;
        else
          d = 0.0;
      }
      out.values[g.index(i, j)] = d;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Samplers

ScalarField field_from_1d(const OneDProfile& p, const AxisymGrid& g, bool as_v,
                          bool analytic_gradient) {
  auto val = [&](double, double z) {
    return as_v ? std::max(0.0, z) : p.u_at(z);
  };
  if (!analytic_gradient) return make_field(g, val);
  auto grad = [&](double, double z) -> Vec2 {
    return {0.0, as_v ? (z > 0.0 ? 1.0 : 0.0) : p.du_at(z)};
  };
  return make_field(g, val, grad);
}

ScalarField field_from_radial(const RadialProfile& p, const AxisymGrid& g,
                              bool analytic_gradient) {
  auto val = [&](double t, double z) { return p.v(std::hypot(t, z)); };
  if (!analytic_gradient) return make_field(g, val);
  auto grad = [&](double t, double z) -> Vec2 {
    const double r = std::hypot(t, z);
    if (r <= p.r0 || r == 0.0) return {};
    const double w = p.dv(r);
    return {w * t / r, w * z / r};
  };
  return make_field(g, val, grad);
}

ScalarField field_from_cone(const ConeProfile& p, const AxisymGrid& g,
                            bool analytic_gradient) {
  auto val = [&](double t, double z) {
    const double r = std::hypot(t, z);
    if (r == 0.0) return 0.0;
    const double th = std::atan2(t, z);  // polar angle from the +z axis
    if (th >= p.theta0) return 0.0;
    return std::max(0.0, r * p.h_at(th));
  };
  if (!analytic_gradient) return make_field(g, val);
  auto grad = [&](double t, double z) -> Vec2 {
    const double r = std::hypot(t, z);
    if (r == 0.0) return {};
    const double th = std::atan2(t, z);
    if (th >= p.theta0) return {};
    const double h = p.h_at(th), dh = p.dh_at(th);
    const double st = std::sin(th), ct = std::cos(th);
    return {h * st + dh * ct, h * ct - dh * st};
  };
  return make_field(g, val, grad);
}

}  // namespace apfb
