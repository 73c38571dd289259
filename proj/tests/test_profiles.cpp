#include <doctest.h>

#include <cmath>
#include <vector>

#include "apfb/field.hpp"
#include "apfb/profiles.hpp"

using namespace apfb;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Fixed-step RK4 oracle for the cone equation, independent of the adaptive
// integrator. Stops by bisection once h crosses h_stop and returns the
// mismatch h' + sqrt(1 - h^2) there.
struct Rk4Cone {
  double theta0 = 0.0;
  double m = 0.0;
  bool crossed = false;
};

Rk4Cone rk4_cone_oracle(const Exponents& e, double h0, double step,
                        double h_stop) {
  auto rhs = [&](double th, double y0, double y1, double* d0, double* d1) {
    *d0 = y1;
    const double cot = std::cos(th) / std::sin(th);
    *d1 = -(e.n - 2.0) * cot * y1 - (e.n - 1.0) * y0 +
          0.5 * e.alpha * (1.0 - y0 * y0 - y1 * y1) / y0;
  };
  const double rhs0 = 0.5 * e.alpha * (1.0 - h0 * h0) / h0 - (e.n - 1.0) * h0;
  const double hpp0 = rhs0 / (e.n - 1.0);
  const double ts = 1e-4;
  double th = ts, y0 = h0 + 0.5 * hpp0 * ts * ts, y1 = hpp0 * ts;

  Rk4Cone out;
  auto take = [&](double from_th, double from0, double from1, double dt,
                  double* o0, double* o1) {
    double k10, k11, k20, k21, k30, k31, k40, k41;
    rhs(from_th, from0, from1, &k10, &k11);
    rhs(from_th + dt / 2, from0 + dt / 2 * k10, from1 + dt / 2 * k11, &k20,
        &k21);
    rhs(from_th + dt / 2, from0 + dt / 2 * k20, from1 + dt / 2 * k21, &k30,
        &k31);
    rhs(from_th + dt, from0 + dt * k30, from1 + dt * k31, &k40, &k41);
    *o0 = from0 + dt / 6 * (k10 + 2 * k20 + 2 * k30 + k40);
    *o1 = from1 + dt / 6 * (k11 + 2 * k21 + 2 * k31 + k41);
  };
  while (th < kPi - 1e-3) {
    double n0, n1;
    take(th, y0, y1, step, &n0, &n1);
    if (n0 <= h_stop) {
      double lo = 0.0, hi = step;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        double m0, m1;
        take(th, y0, y1, mid, &m0, &m1);
        if (m0 <= h_stop)
          hi = mid;
        else
          lo = mid;
      }
      double m0, m1;
      take(th, y0, y1, hi, &m0, &m1);
      out.crossed = true;
      out.theta0 = th + hi;
      out.m = m1 + std::sqrt(std::max(0.0, 1.0 - m0 * m0));
      return out;
    }
    y0 = n0;
    y1 = n1;
    th += step;
  }
  return out;
}

}  // namespace

TEST_CASE("1D profile satisfies its ODE and equipartition") {
  for (double gamma : {0.2, 0.5, 1.0, 1.5}) {
    const Exponents e = derive_exponents(gamma, 3);
    const Grid1D g = make_grid_1d(0.0, 1.0, 1e-3);
    const OneDProfile p = one_d_profile(e, g);

    for (int i = 0; i < g.m; ++i) {
      const double t = g.t(i);
      if (t < 1e-3) continue;
      const double u = p.u[i];
      const double du = p.du[i];
      const double ddu = p.ddu_at(t);
      const double ug1 = std::pow(u, gamma - 1.0);
      // u'' = (gamma/2) u^(gamma-1)
      CHECK(std::abs(ddu - 0.5 * gamma * ug1) <= 1e-10 * std::abs(ug1));
      // |u'|^2 = u^gamma
      const double ug = std::pow(u, gamma);
      CHECK(std::abs(du * du - ug) <= 1e-12 * ug);
    }
  }
}

TEST_CASE("gamma = 1 gives u = t^2/4") {
  const Exponents e = derive_exponents(1.0, 3);
  const Grid1D g = make_grid_1d(0.0, 1.0, 0.1);
  const OneDProfile p = one_d_profile(e, g);
  for (int i = 0; i < g.m; ++i)
    CHECK(p.u[i] == doctest::Approx(g.t(i) * g.t(i) / 4.0).epsilon(1e-14));
}

TEST_CASE("v = beta u^(1/beta) recovers t exactly on the 1D profile") {
  for (double gamma : {0.3, 1.2}) {
    const Exponents e = derive_exponents(gamma, 3);
    const AxisymGrid g = make_axisym_grid(0.5, -0.5, 1.0, 0.05, 3);
    const OneDProfile p = one_d_profile(e, make_grid_1d(0.0, 1.0, 0.05));
    const ScalarField u = field_from_1d(p, g, false, false);
    const ScalarField v = v_from_u(u, e);
    for (int i = 0; i < g.ntau; ++i)
      for (int j = 0; j < g.nz; ++j)
        if (u.masked(i, j))
          CHECK(v.value(i, j) == doctest::Approx(g.z(j)).epsilon(1e-12));
  }
}

TEST_CASE("change of variables round-trips") {
  const Exponents e = derive_exponents(0.7, 4);
  const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, 0.1, 4);
  const ScalarField u = make_field(g, [](double t, double z) {
    const double s = std::max(0.0, z - 0.2 * t);
    return s * s;
  });
  const ScalarField u2 = u_from_v(v_from_u(u, e), e);
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    if (u.values[k] >= 1e-8)
      CHECK(std::abs(u2.values[k] - u.values[k]) <= 1e-13 * u.values[k]);
    CHECK(u2.mask[k] == u.mask[k]);
  }
  ScalarField bad = u;
  bad.values[5] = -1.0;
  CHECK_THROWS_AS(v_from_u(bad, e), std::domain_error);
}

TEST_CASE("gradient relation |grad v|^2 = |grad u|^2 / u^gamma, discretely") {
  const double gamma = 0.8;
  const Exponents e = derive_exponents(gamma, 3);
  auto gap = [&](double h) {
    const AxisymGrid g = make_axisym_grid(0.5, -0.5, 1.0, h, 3);
    const OneDProfile p = one_d_profile(e, make_grid_1d(0.0, 1.0, h));
    const ScalarField u = field_from_1d(p, g, false, false);
    const ScalarField v = v_from_u(u, e);
    const auto gu = nodal_gradient(u);
    const auto gv = nodal_gradient(v);
    double worst = 0.0;
    for (int i = 0; i < g.ntau; ++i)
      for (int j = 0; j < g.nz; ++j) {
        const double z = g.z(j);
        if (z < 0.3 || z > 0.9) continue;  // interior of the mask
        const std::size_t k = g.index(i, j);
        const double lhs = gv[k].z * gv[k].z;
        const double rhs = gu[k].z * gu[k].z / std::pow(u.values[k], gamma);
        worst = std::max(worst, std::abs(lhs - rhs) / rhs);
      }
    return worst;
  };
  const double g1 = gap(0.02), g2 = gap(0.01);
  CHECK(g1 / g2 > 3.0);  // O(h^2)
}

TEST_CASE("radial profile reproduces the harmonic solution at alpha = 0") {
  const Exponents e = derive_exponents(0.0, 3);
  const RadialProfile p = radial_profile(e, 1.0, 5.0, 1e-10);
  // v = 1 - 1/r
  for (double r = 1.1; r <= 5.0; r += 0.3) {
    CHECK(std::abs(p.v(r) - (1.0 - 1.0 / r)) <= 1e-8 * (1.0 - 1.0 / r));
    CHECK(p.dv(r) == doctest::Approx(1.0 / (r * r)).epsilon(1e-8));
  }
  CHECK(p.max_defect <= 1e-8);
}

TEST_CASE("radial profile in one dimension is the straight line") {
  const Exponents e = derive_exponents(0.0, 1);
  const RadialProfile p = radial_profile(e, 0.5, 3.0, 1e-10);
  for (double r = 0.6; r <= 3.0; r += 0.4)
    CHECK(p.v(r) == doctest::Approx(r - 0.5).epsilon(1e-10));
}

TEST_CASE("radial launch curvature matches the Taylor matching") {
  // v''(r0) = -(n-1)/((1+alpha) r0)
  const Exponents e = exponents_from_alpha(1.0, 3);
  const RadialProfile p = radial_profile(e, 1.0, 4.0, 1e-10);
  CHECK(p.vpp_r0 == doctest::Approx(-1.0).epsilon(1e-12));
  // and the trajectory agrees just off the launch
  CHECK(p.ddv(1.0 + 2e-4) == doctest::Approx(-1.0).epsilon(2e-3));
}

TEST_CASE("cancellation exponent: 1 - v'^2 vanishes linearly in r - r0") {
  const Exponents e = exponents_from_alpha(0.5, 4);
  const RadialProfile p = radial_profile(e, 1.0, 4.0, 1e-10);
  std::vector<double> xs, ys;
  for (double s = 1e-4; s <= 1e-2; s *= 1.7) {
    const double dv = p.dv(1.0 + s);
    xs.push_back(std::log(s));
    ys.push_back(std::log((1.0 - dv) * (1.0 + dv)));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = static_cast<int>(xs.size());
  for (int i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope > 0.95);
  CHECK(slope < 1.05);
}

TEST_CASE("cone shot at alpha = 0, n = 3 is h0 cos(theta)") {
  const Exponents e = derive_exponents(0.0, 3);
  ConeShot s = cone_shoot(e, 1.0, 1e-8);
  REQUIRE(s.outcome == ConeOutcome::Crossing);
  CHECK(s.profile->theta0 == doctest::Approx(kPi / 2).epsilon(1e-6));
  CHECK(std::abs(s.profile->m) < 1e-6);

  ConeShot s2 = cone_shoot(e, 0.5, 1e-8);
  REQUIRE(s2.outcome == ConeOutcome::Crossing);
  // h = 0.5 cos(theta): slope at crossing -0.5, mismatch +0.5
  CHECK(s2.profile->m == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("cone shot matches the fixed-step RK4 oracle (alpha = 0 table)") {
  const Exponents e = derive_exponents(0.0, 3);
  for (double h0 : {0.8, 1.0, 1.3}) {
    ConeShot s = cone_shoot(e, h0, 1e-8);
    const Rk4Cone oracle = rk4_cone_oracle(e, h0, 1e-5, 1e-6);
    REQUIRE(s.outcome == ConeOutcome::Crossing);
    REQUIRE(oracle.crossed);
    CHECK(std::abs(s.profile->m - oracle.m) <= 1e-6);
    CHECK(std::abs(s.profile->theta0 - oracle.theta0) <= 1e-5);
  }
}

TEST_CASE("adaptive cone trajectory matches RK4 away from the stop level") {
  // for alpha > 0 the stop at h ~ 1e-6 is singular enough that a fixed-step
  // oracle loses order there; compare states at a fixed angle instead
  const Exponents e = exponents_from_alpha(0.25, 3);
  struct Probe {
    double h0, theta_c;
  };
  for (const Probe pr : {Probe{0.0726, 2.5}, Probe{1.3, 1.2}}) {
    ConeShot s = cone_shoot(e, pr.h0, 1e-8);
    REQUIRE(s.outcome == ConeOutcome::Crossing);
    // fixed-step RK4 to theta_c
    auto rhs = [&](double th, double y0, double y1, double* d0, double* d1) {
      *d0 = y1;
      const double cot = std::cos(th) / std::sin(th);
      *d1 = -(e.n - 2.0) * cot * y1 - (e.n - 1.0) * y0 +
            0.5 * e.alpha * (1.0 - y0 * y0 - y1 * y1) / y0;
    };
    const double rhs0 =
        0.5 * e.alpha * (1.0 - pr.h0 * pr.h0) / pr.h0 - (e.n - 1.0) * pr.h0;
    const double hpp0 = rhs0 / (e.n - 1.0);
    const double ts = 1e-4;
    double th = ts, y0 = pr.h0 + 0.5 * hpp0 * ts * ts, y1 = hpp0 * ts;
    const int nsteps = static_cast<int>((pr.theta_c - ts) / 1e-5);
    const double dt = (pr.theta_c - ts) / nsteps;
    for (int k = 0; k < nsteps; ++k) {
      double k10, k11, k20, k21, k30, k31, k40, k41;
      rhs(th, y0, y1, &k10, &k11);
      rhs(th + dt / 2, y0 + dt / 2 * k10, y1 + dt / 2 * k11, &k20, &k21);
      rhs(th + dt / 2, y0 + dt / 2 * k20, y1 + dt / 2 * k21, &k30, &k31);
      rhs(th + dt, y0 + dt * k30, y1 + dt * k31, &k40, &k41);
      y0 += dt / 6 * (k10 + 2 * k20 + 2 * k30 + k40);
      y1 += dt / 6 * (k11 + 2 * k21 + 2 * k31 + k41);
      th += dt;
    }
    CHECK(std::abs(s.profile->h_at(pr.theta_c) - y0) <= 1e-7);
    CHECK(std::abs(s.profile->dh_at(pr.theta_c) - y1) <= 1e-7);
  }
}

TEST_CASE("initial concavity sign: large h0 bends down immediately") {
  const Exponents e = exponents_from_alpha(0.25, 3);
  const double h0 = 3.0;
  const double rhs0 = 0.5 * e.alpha * (1.0 - h0 * h0) / h0 - (e.n - 1) * h0;
  CHECK(rhs0 < 0.0);
  ConeShot s = cone_shoot(e, h0, 1e-8);
  CHECK(s.outcome == ConeOutcome::Crossing);
}

TEST_CASE("cone_solve on a bracket containing the flat cone") {
  const Exponents e = exponents_from_alpha(0.25, 3);
  ConeProfile c = cone_solve(e, 0.99, 1.2, 1e-8);
  CHECK(std::abs(c.m) <= 1e-8);
  CHECK(cone_is_flat(c));
  CHECK_THROWS_AS(cone_solve(e, 2.0, 3.0, 1e-8), ValidationError);
}

TEST_CASE("synthetic mismatch bisection sanity") {
  // bisection machinery on m(h0) = h0 - 0.5 has its root at 0.5; emulate
  // with the same loop the solver uses
  auto mism = [](double h0) { return h0 - 0.5; };
  double lo = 0.1, hi = 0.9;
  double mlo = mism(lo);
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mm = mism(mid);
    if (std::abs(mm) <= 1e-12) break;
    if (std::signbit(mm) == std::signbit(mlo)) {
      lo = mid;
      mlo = mm;
    } else {
      hi = mid;
    }
  }
  CHECK(0.5 * (lo + hi) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("cone scan finds the flat root and reports outcomes") {
  const Exponents e = exponents_from_alpha(0.25, 3);
  ConeScanResult r = cone_scan(e, 1e-2, 10.0, 200, 1e-8, 2);
  CHECK(r.entries.size() == 200);
  bool found_flat = false;
  for (const auto& c : r.cones) found_flat = found_flat || cone_is_flat(c);
  CHECK(found_flat);
}

TEST_CASE("v_tau of the 1D solution vanishes") {
  const AxisymGrid g = make_axisym_grid(0.5, -0.5, 0.5, 0.05, 3);
  const ScalarField v =
      make_field(g, [](double, double z) { return std::max(0.0, z); });
  const ScalarField vt = v_tau_field(v);
  for (double x : vt.values) CHECK(std::abs(x) <= 1e-13);
}

TEST_CASE("v_tau of a radial field matches v'(r) tau / r") {
  const Exponents e = exponents_from_alpha(0.5, 3);
  const RadialProfile p = radial_profile(e, 0.4, 3.0, 1e-10);
  auto worst = [&](double h) {
    const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, h, 3);
    const ScalarField v = field_from_radial(p, g, false);
    const ScalarField vt = v_tau_field(v);
    double w = 0.0;
    for (int i = 0; i < g.ntau; ++i)
      for (int j = 0; j < g.nz; ++j) {
        const double r = std::hypot(g.tau(i), g.z(j));
        if (r < 0.55 || r > 0.9) continue;  // stay off FB and grid edge
        const double exact = p.dv(r) * g.tau(i) / r;
        w = std::max(w, std::abs(vt.value(i, j) - exact));
      }
    return w;
  };
  const double w1 = worst(0.02), w2 = worst(0.01);
  CHECK(w1 / w2 > 3.0);
}

TEST_CASE("v_tau of a sampled cone matches the chain rule") {
  // use the non-flat root (the flat one has v_tau identically zero)
  const Exponents e = exponents_from_alpha(0.25, 3);
  ConeProfile c = cone_solve(e, 0.0713, 0.0802, 1e-10);
  REQUIRE_FALSE(cone_is_flat(c));
  auto worst = [&](double h) {
    const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, h, 3);
    const ScalarField v = field_from_cone(c, g, false);
    const ScalarField vt = v_tau_field(v);
    double w = 0.0;
    for (int i = 0; i < g.ntau; ++i)
      for (int j = 0; j < g.nz; ++j) {
        const double t = g.tau(i), z = g.z(j);
        const double r = std::hypot(t, z);
        if (r < 0.3 || r > 0.9) continue;
        const double th = std::atan2(t, z);
        if (th > c.theta0 - 0.3) continue;  // off the free-boundary band
        const double exact =
            c.h_at(th) * std::sin(th) + c.dh_at(th) * std::cos(th);
        w = std::max(w, std::abs(vt.value(i, j) - exact));
      }
    return w;
  };
  const double w1 = worst(0.02), w2 = worst(0.01);
  CHECK(w1 / w2 > 3.0);
}
