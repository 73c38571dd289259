#include "apfb/quadrature.hpp"

#include <cmath>
#include <span>

#include "apfb/kernels.hpp"

namespace apfb {

namespace {

// Correction for one masked run [j0, j1] whose low end is a mask
// transition: the leading singular model m(z) = S0 (sl (z - z_fb))^p is
// integrated exactly over [z_fb, z_{j1}] while its own trapezoid sum over
// the run nodes is removed. Adding this to the plain trapezoid of the run
// amounts to integrating f - m by trapezoid (smooth enough for second
// order) plus the model exactly. The caller mirrors indices for high ends.
template <class FS, class VS>
double run_correction(const FS& f, const VS& v, double h, int j0, int j1,
                      double p) {
  const int len = j1 - j0 + 1;
  if (len < 3) return 0.0;
  const double v0 = v(j0);
  const double v1 = v(j0 + 1);
  if (!(v0 > 0.0)) return 0.0;
  const double sl = (v1 - v0) / h;
  if (!(sl > 0.0)) return 0.0;
  // sub-cell FB position from the linear extension of v
  double cut = v0 / sl;  // distance from node j0 back to the FB
  if (cut > h) cut = h;
  const double s0 = f(j0) / std::pow(v0, p);
  if (!std::isfinite(s0)) return 0.0;

  const double span = (j1 - j0) * h + cut;  // z_{j1} - z_fb
  const double slp = std::pow(sl, p);
  double corr = s0 * slp * std::pow(span, p + 1.0) / (p + 1.0);
  for (int j = j0; j <= j1; ++j) {
    const double w = (j == j0 || j == j1) ? 0.5 * h : h;
    const double dist = (j - j0) * h + cut;
    corr -= w * s0 * slp * std::pow(dist, p);
  }
  return corr;
}

template <class FS, class VS, class MS>
double line_integral(const FS& f, const VS& v, const MS& masked, int count,
                     double /*x0*/, double h, bool singular, double p) {
  double total = 0.0;
  int j = 0;
  while (j < count) {
    if (!masked(j)) {
      ++j;
      continue;
    }
    int j1 = j;
    while (j1 + 1 < count && masked(j1 + 1)) ++j1;
    // plain trapezoid over the run
    if (j1 == j) {
      total += h * f(j);  // isolated node: midpoint-like weight
    } else {
      double run = 0.5 * h * (f(j) + f(j1));
      for (int q = j + 1; q < j1; ++q) run += h * f(q);
      total += run;
    }
    if (singular && j1 > j) {
      if (j > 0)  // low end is a mask transition
        total += run_correction(f, v, h, j, j1, p);
      if (j1 < count - 1) {  // high end is a mask transition: mirror
        auto rf = [&](int q) { return f(j1 - (q - j)); };
        auto rv = [&](int q) { return v(j1 - (q - j)); };
        total += run_correction(rf, rv, h, j, j1, p);
      }
    }
    j = j1 + 1;
  }
  return total;
}

}  // namespace

double integrate_masked_1d(double x0, double h, const std::vector<double>& f,
                           const std::vector<std::uint8_t>& mask,
                           const FbSingularity* fb) {
  const bool singular = fb && fb->v && fb->p < 2.0;
  auto fs = [&](int j) { return f[j]; };
  auto vs = [&](int j) { return singular ? (*fb->v)[j] : 0.0; };
  auto ms = [&](int j) { return mask[j] != 0; };
  return line_integral(fs, vs, ms, static_cast<int>(f.size()), x0, h, singular,
                       singular ? fb->p : 1.0);
}

double integrate_masked(const AxisymGrid& g, const std::vector<double>& density,
                        const std::vector<std::uint8_t>& mask,
                        const FbSingularity* fb) {
  const bool singular = fb && fb->v && fb->p < 2.0;
  std::vector<double> col(g.ntau), wtau(g.ntau);
  for (int i = 0; i < g.ntau; ++i) {
    const std::size_t base = g.index(i, 0);
    auto fs = [&](int j) { return density[base + j]; };
    auto vs = [&](int j) { return singular ? (*fb->v)[base + j] : 0.0; };
    auto ms = [&](int j) { return mask[base + j] != 0; };
    col[i] = line_integral(fs, vs, ms, g.nz, g.z_min, g.h, singular,
                           singular ? fb->p : 1.0);
    const double w = (i == 0 || i == g.ntau - 1) ? 0.5 * g.h : g.h;
    wtau[i] = w * g.weight(i);
  }
  return kernels::dot(col, wtau);
}

double integrate_all(const AxisymGrid& g, const std::vector<double>& density) {
  std::vector<std::uint8_t> mask(g.size(), 1);
  return integrate_masked(g, density, mask, nullptr);
}

}  // namespace apfb
