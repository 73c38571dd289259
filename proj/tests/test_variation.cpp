#include <doctest.h>

#include <cmath>
#include <random>

#include "apfb/energy.hpp"
#include "apfb/profiles.hpp"
#include "apfb/variation.hpp"

using namespace apfb;

namespace {

VectorFieldSpec bump_phi(double amp = 1.0) {
  VectorFieldSpec vf;
  vf.phi = [amp](double t, double z) -> Vec2 {
    return {amp * bump3(t, 0.5, 0.3) * bump3(z, 0.0, 0.4),
            amp * 0.5 * bump3(t, 0.45, 0.35) * bump3(z, 0.1, 0.35)};
  };
  vf.dphi = [amp](double t, double z) -> Mat2 {
    Mat2 m;
    m.tt = amp * bump3_d(t, 0.5, 0.3) * bump3(z, 0.0, 0.4);
    m.tz = amp * bump3(t, 0.5, 0.3) * bump3_d(z, 0.0, 0.4);
    m.zt = amp * 0.5 * bump3_d(t, 0.45, 0.35) * bump3(z, 0.1, 0.35);
    m.zz = amp * 0.5 * bump3(t, 0.45, 0.35) * bump3_d(z, 0.1, 0.35);
    return m;
  };
  vf.support = {0.1, 0.8, -0.4, 0.45};
  return vf;
}

}  // namespace

TEST_CASE("pullback with zero Phi is the identity") {
  const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, 0.05, 2);
  const ScalarField w = make_field(g, [](double t, double z) {
    return std::max(0.0, 1.0 + 0.2 * t - z);
  });
  VariationSpec spec;
  spec.field.phi = [](double, double) -> Vec2 { return {}; };
  spec.field.dphi = [](double, double) -> Mat2 { return {}; };
  spec.field.support = {0.2, 0.8, -0.5, 0.5};
  const ScalarField we = pullback(w, spec, 1e-2);
  CHECK(we.values == w.values);
  CHECK(we.mask == w.mask);
}

TEST_CASE("constant Phi on a plateau translates the bump") {
  const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, 1.0 / 128, 2);
  // bump living well inside the plateau of Phi
  auto ufun = [](double t, double z) {
    return bump3(t, 0.5, 0.12) * bump3(z, 0.0, 0.12);
  };
  const ScalarField w = make_field(g, ufun);
  const Vec2 c{0.4, -0.7};
  VariationSpec spec;
  // plateau = 1 on [0.3,0.7]x[-0.25,0.25], tapering outside
  auto plateau = [](double x, double lo, double hi, double ramp) {
    if (x <= lo - ramp || x >= hi + ramp) return 0.0;
    if (x >= lo && x <= hi) return 1.0;
    const double s = x < lo ? (x - (lo - ramp)) / ramp : ((hi + ramp) - x) / ramp;
    return s * s * (3.0 - 2.0 * s);
  };
  spec.field.phi = [=](double t, double z) -> Vec2 {
    const double p = plateau(t, 0.3, 0.7, 0.15) * plateau(z, -0.25, 0.25, 0.2);
    return {c.tau * p, c.z * p};
  };
  spec.field.dphi = [=](double t, double z) -> Mat2 {
    // finite-difference differential is fine here: only the invertibility
    // check uses it, and the plateau keeps it small
    const double d = 1e-6;
    const Vec2 pt0 = spec.field.phi(t + d, z), pt1 = spec.field.phi(t - d, z);
    const Vec2 pz0 = spec.field.phi(t, z + d), pz1 = spec.field.phi(t, z - d);
    Mat2 m;
    m.tt = (pt0.tau - pt1.tau) / (2 * d);
    m.tz = (pz0.tau - pz1.tau) / (2 * d);
    m.zt = (pt0.z - pt1.z) / (2 * d);
    m.zz = (pz0.z - pz1.z) / (2 * d);
    return m;
  };
  spec.field.support = {0.15, 0.85, -0.45, 0.45};
  const double eps = 5e-3;
  const ScalarField we = pullback(w, spec, eps);
  // inside the plateau the pullback is a pure translation
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nz; ++j) {
      const double t = g.tau(i), z = g.z(j);
      if (t < 0.36 || t > 0.64 || z < -0.18 || z > 0.18) continue;
      const double expect = ufun(t - eps * c.tau, z - eps * c.z);
      CHECK(std::abs(we.value(i, j) - expect) <= 1e-5);
    }
}

TEST_CASE("fixed-point inverse beats the truncated series at third order") {
  const auto vf = bump_phi();
  auto inverse_gap = [&](double eps) {
    // worst deviation between the fixed point and y - eps Phi + eps^2 DPhi Phi
    double worst = 0.0;
    for (double t = 0.2; t <= 0.75; t += 0.1)
      for (double z = -0.3; z <= 0.4; z += 0.1) {
        double xt = t, xz = z;
        for (int it = 0; it < 200; ++it) {
          const Vec2 p = vf.phi(xt, xz);
          const double nt = t - eps * p.tau, nz = z - eps * p.z;
          if (std::abs(nt - xt) + std::abs(nz - xz) < 1e-16) break;
          xt = nt;
          xz = nz;
        }
        const Vec2 p = vf.phi(t, z);
        const Mat2 m = vf.dphi(t, z);
        const Vec2 dpp = apply(m, p);
        const double st = t - eps * p.tau + eps * eps * dpp.tau;
        const double sz = z - eps * p.z + eps * eps * dpp.z;
        worst = std::max(worst, std::hypot(xt - st, xz - sz));
      }
    return worst;
  };
  const double g1 = inverse_gap(1e-2);
  const double g2 = inverse_gap(5e-3);
  const double ratio = g1 / g2;
  CHECK(ratio > 6.0);  // O(eps^3): halving gives ~8
  CHECK(ratio < 10.0);
}

TEST_CASE("pullback preserves the field range") {
  const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, 1.0 / 64, 2);
  std::mt19937_64 rng(17);
  const ScalarField w = make_field(g, [&](double t, double z) {
    const double base = std::max(0.0, 0.5 + 0.3 * std::sin(5 * t) - z * z);
    const double jitter = 0.1 * (double(rng() >> 11) * 0x1.0p-53);
    return base + (base > 0 ? jitter : 0.0);
  });
  const double lo = *std::min_element(w.values.begin(), w.values.end());
  const double hi = *std::max_element(w.values.begin(), w.values.end());
  VariationSpec spec;
  spec.field = bump_phi();
  const ScalarField we = pullback(w, spec, 1e-2);
  for (double x : we.values) {
    CHECK(x >= lo);
    CHECK(x <= hi + 1e-15);
  }
}

TEST_CASE("fit recovers exact cubic coefficients") {
  const std::vector<double> eps = VariationSpec::default_ladder();
  std::vector<double> en(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i)
    en[i] = 3.0 + 2.0 * eps[i] + 5.0 * eps[i] * eps[i];
  const ExpansionFit fit = fit_expansion(eps, en);
  CHECK(fit.e0 == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.e1 == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.e2 == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(fit.residual <= 1e-12);

  // an added eps^3 term leaves (E0, E1, E2) alone but shows in the residual
  for (std::size_t i = 0; i < eps.size(); ++i)
    en[i] += 7.0 * eps[i] * eps[i] * eps[i];
  const ExpansionFit fit2 = fit_expansion(eps, en);
  CHECK(fit2.e0 == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(fit2.e1 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit2.e2 == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(fit2.residual > 1e-9);

  CHECK_THROWS_AS(fit_expansion({1e-2, 5e-3}, {1.0, 2.0}), ValidationError);
}

TEST_CASE("verify_expansion on the fully analytic polynomial case") {
  // tensor-cubic field: the cubic interpolant reproduces it exactly, so the
  // whole pullback pipeline is analytic; G = 1, F = 0
  const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, 1.0 / 128, 2);
  auto uf = [](double t, double z) {
    return (1.0 + 0.5 * t + 0.1 * t * t * t) *
           (2.0 + z / 3.0 - z * z * z / 7.0);
  };
  auto duf = [](double t, double z) -> Vec2 {
    return {(0.5 + 0.3 * t * t) * (2.0 + z / 3.0 - z * z * z / 7.0),
            (1.0 + 0.5 * t + 0.1 * t * t * t) *
                (1.0 / 3.0 - 3.0 * z * z / 7.0)};
  };
  const ScalarField w = make_field(g, uf, duf);
  GeneralEnergySpec s;
  s.G = [](double) { return 1.0; };
  s.F = [](double) { return 0.0; };
  VariationSpec spec;
  spec.field = bump_phi(0.5);
  const VerifyReport rep = verify_expansion(w, s, spec);
  CHECK(rep.rel_gap_e1 <= 1e-6);
  CHECK(rep.rel_gap_e2 <= 1e-6);
}

TEST_CASE("verify_expansion with Phi = 0 reports zero gaps") {
  const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, 1.0 / 32, 2);
  const ScalarField w = make_field(
      g, [](double t, double z) { return 2.0 + 0.3 * t + 0.5 * z; });
  GeneralEnergySpec s;
  s.G = [](double) { return 1.0; };
  s.F = [](double) { return 0.0; };
  VariationSpec spec;
  spec.field.phi = [](double, double) -> Vec2 { return {}; };
  spec.field.dphi = [](double, double) -> Mat2 { return {}; };
  spec.field.support = {0.2, 0.8, -0.5, 0.5};
  const VerifyReport rep = verify_expansion(w, s, spec);
  CHECK(rep.rel_gap_e1 == 0.0);
  CHECK(rep.rel_gap_e2 == 0.0);
}

TEST_CASE("verify_expansion on the radial profile with the modified energy") {
  const Exponents e = exponents_from_alpha(0.5, 3);
  const RadialProfile p = radial_profile(e, 0.35, 4.0, 1e-10);
  const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, 1.0 / 128, 3);
  const ScalarField v = field_from_radial(p, g, true);
  VariationSpec spec;
  spec.field = bump_phi(0.3);  // support avoids the FB ball r <= 0.35
  const VerifyReport rep = verify_expansion(v, mod_energy_spec(e), spec);
  CHECK(rep.rel_gap_e1 <= 1e-3);
  CHECK(rep.rel_gap_e2 <= 1e-3);
}

TEST_CASE("first variation matches a brute-force difference quotient") {
  // non-critical pairing: profile of one alpha against the energy of another
  const Exponents e_prof = exponents_from_alpha(0.5, 3);
  const Exponents e_energy = exponents_from_alpha(1.0, 3);
  const RadialProfile p = radial_profile(e_prof, 0.35, 4.0, 1e-10);
  const AxisymGrid g = make_axisym_grid(1.0, -1.0, 1.0, 1.0 / 128, 3);
  const ScalarField v = field_from_radial(p, g, true);
  const GeneralEnergySpec s = mod_energy_spec(e_energy);
  VariationSpec spec;
  spec.field = bump_phi(0.3);

  const double e0 = general_energy(v, s).total;
  std::vector<double> d;
  for (double eps : spec.ladder.empty() ? VariationSpec::default_ladder()
                                        : spec.ladder)
    d.push_back((general_energy(pullback(v, spec, eps), s).total - e0) / eps);
  // two Richardson sweeps on the halving ladder kill the eps and eps^2 terms
  std::vector<double> r1, r2;
  for (std::size_t i = 0; i + 1 < d.size(); ++i)
    r1.push_back(2.0 * d[i + 1] - d[i]);
  for (std::size_t i = 0; i + 1 < r1.size(); ++i)
    r2.push_back((4.0 * r1[i + 1] - r1[i]) / 3.0);
  const double extrapolated = r2.back();
  const double closed = first_variation(v, s, spec.field);
  CHECK(std::abs(extrapolated - closed) <= 1e-4 * std::abs(closed));
}
