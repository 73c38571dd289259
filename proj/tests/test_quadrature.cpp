#include <doctest.h>

#include <cmath>
#include <vector>

#include "apfb/grid.hpp"
#include "apfb/quadrature.hpp"

using namespace apfb;

namespace {

// f = S(x) v(x)^p with curved v and varying bounded factor S; the free
// boundary sits strictly between nodes.
double vfun(double x) { return x * (1.0 + x / 3.0); }
// bounded factor; the (1-x)^3 taper pins the top endpoint so only the
// free-boundary end matters for the convergence order
double sfun(double x) {
  if (x >= 1.0) return 0.0;
  const double taper = (1.0 - x) * (1.0 - x) * (1.0 - x);
  return (1.0 + 0.5 * x + 0.25 * std::sin(3.0 * x)) * taper;
}

double integral_1d(double p, int m) {
  const double h = 1.0 / (m - 1);
  const double shift = 0.37 * h;  // FB at x = shift, off the lattice
  const int pad = 10;
  std::vector<double> f(m + pad, 0.0), v(m + pad, 0.0);
  std::vector<std::uint8_t> mask(m + pad, 0);
  for (int j = 0; j < m + pad; ++j) {
    const double x = (j - pad) * h - shift;
    if (x > 0.0) {
      v[j] = vfun(x);
      f[j] = sfun(x) * std::pow(v[j], p);
      mask[j] = 1;
    }
  }
  FbSingularity fb{&v, p};
  return integrate_masked_1d(-pad * h - shift, h, f, mask, &fb);
}

}  // namespace

TEST_CASE("1d singular band rule integrates S v^p at second order") {
  for (double p : {0.25, 0.5, 0.75}) {
    const double ref = integral_1d(p, 25601);  // converged reference
    const double e1 = std::abs(integral_1d(p, 101) - ref);
    const double e2 = std::abs(integral_1d(p, 201) - ref);
    const double e3 = std::abs(integral_1d(p, 401) - ref);
    CHECK(e1 / e2 > 3.2);
    CHECK(e2 / e3 > 3.2);
  }
}

TEST_CASE("plain rule alone is only order 1+p on the same integrand") {
  const double p = 0.5;
  auto plain = [&](int m) {
    const double h = 1.0 / (m - 1);
    const int pad = 10;
    std::vector<double> f(m + pad, 0.0);
    std::vector<std::uint8_t> mask(m + pad, 0);
    for (int j = 0; j < m + pad; ++j) {
      const double x = (j - pad) * h - 0.37 * h;
      if (x > 0.0) {
        f[j] = sfun(x) * std::pow(vfun(x), p);
        mask[j] = 1;
      }
    }
    return integrate_masked_1d(0.0, h, f, mask, nullptr);
  };
  const double ref = integral_1d(p, 25601);
  const double e1 = std::abs(plain(201) - ref);
  const double e2 = std::abs(plain(401) - ref);
  const double order = std::log2(e1 / e2);
  CHECK(order < 1.9);  // genuinely worse than the corrected rule
  CHECK(order > 1.0);
}

TEST_CASE("2d masked integral with straight free boundary") {
  // integrand S(z) v(z)^p (1 + tau) over {z > 0} against the tau weight
  const double p = 0.5;
  auto value = [&](double h) {
    const AxisymGrid g = make_axisym_grid(1.0, -0.25, 1.0, h, 3);
    std::vector<double> f(g.size(), 0.0), v(g.size(), 0.0);
    std::vector<std::uint8_t> mask(g.size(), 0);
    for (int i = 0; i < g.ntau; ++i)
      for (int j = 0; j < g.nz; ++j) {
        const double z = g.z(j) - 0.4 * h;
        if (z > 0.0) {
          const std::size_t k = g.index(i, j);
          v[k] = vfun(z);
          f[k] = sfun(std::min(z, 1.0)) * std::pow(v[k], p) * (1.0 + g.tau(i));
          mask[k] = 1;
        }
      }
    FbSingularity fb{&v, p};
    return integrate_masked(g, f, mask, &fb);
  };
  const double ref = value(1.0 / 1280);
  const double e1 = std::abs(value(1.0 / 40) - ref);
  const double e2 = std::abs(value(1.0 / 80) - ref);
  const double e3 = std::abs(value(1.0 / 160) - ref);
  CHECK(e1 / e2 > 3.2);
  CHECK(e2 / e3 > 3.2);
}

TEST_CASE("masked region not touching any transition integrates smoothly") {
  const AxisymGrid g = make_axisym_grid(1.0, 0.0, 1.0, 0.01, 2);
  std::vector<double> f(g.size());
  for (int i = 0; i < g.ntau; ++i)
    for (int j = 0; j < g.nz; ++j)
      f[g.index(i, j)] = std::sin(g.tau(i)) * std::exp(g.z(j));
  const double got = integrate_all(g, f);
  const double exact = (1.0 - std::cos(1.0)) * (std::exp(1.0) - 1.0);
  CHECK(got == doctest::Approx(exact).epsilon(2e-5));
}
