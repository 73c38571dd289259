#include "apfb/energy.hpp"

#include <cmath>

#include "apfb/io.hpp"
#include "apfb/quadrature.hpp"

namespace apfb {

GeneralEnergySpec ap_energy_spec(const Exponents& exp) {
  GeneralEnergySpec s;
  s.G = [](double) { return 1.0; };
  s.F = [g = exp.gamma](double u) { return std::pow(u, g); };
  s.fb_exponent = exp.alpha;
  s.fb_transform = [b = exp.beta](double u) {
    return u <= 0.0 ? 0.0 : b * std::pow(u, 1.0 / b);
  };
  return s;
}

GeneralEnergySpec mod_energy_spec(const Exponents& exp) {
  GeneralEnergySpec s;
  s.G = [a = exp.alpha](double v) { return std::pow(v, a); };
  s.F = [](double) { return 1.0; };
  s.fb_exponent = exp.alpha;
  s.fb_transform = [](double v) { return v; };
  return s;
}

namespace {

struct Densities {
  std::vector<double> grad_part, pot_part;
  std::vector<double> vlin;  // fb_transform samples, for the singular band
  bool singular = false;
};

Densities densities(const ScalarField& w, const GeneralEnergySpec& s) {
  const auto grad = gradient_or_fd(w);
  Densities d;
  const std::size_t n = w.values.size();
  d.grad_part.assign(n, 0.0);
  d.pot_part.assign(n, 0.0);
  d.singular = std::isfinite(s.fb_exponent) && s.fb_exponent < 2.0 &&
               static_cast<bool>(s.fb_transform);
  if (d.singular) d.vlin.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!w.mask[k]) continue;
    const double val = w.values[k];
    const double g = s.G(val);
    const double f = s.F(val);
    const double g2 = dot(grad[k], grad[k]);
    if (!std::isfinite(g) || !std::isfinite(f))
      throw SolverError("energy: non-finite G/F handle output");
    d.grad_part[k] = g * g2;
    d.pot_part[k] = g * f;
    if (d.singular) d.vlin[k] = s.fb_transform(val);
  }
  return d;
}

}  // namespace

EnergyReport general_energy(const ScalarField& w, const GeneralEnergySpec& s) {
  Densities d = densities(w, s);
  FbSingularity fb{&d.vlin, s.fb_exponent};
  const FbSingularity* fbp = d.singular ? &fb : nullptr;
  EnergyReport rep;
  rep.h = w.grid.h;
  rep.gradient_part = integrate_masked(w.grid, d.grad_part, w.mask, fbp);
  rep.potential_part = integrate_masked(w.grid, d.pot_part, w.mask, fbp);
  rep.total = rep.gradient_part + rep.potential_part;
  return rep;
}

EnergyReport energy_ap(const ScalarField& u, const Exponents& exp) {
  EnergyReport rep = general_energy(u, ap_energy_spec(exp));
  rep.exp = exp;
  return rep;
}

EnergyReport energy_mod(const ScalarField& v, const Exponents& exp) {
  EnergyReport rep = general_energy(v, mod_energy_spec(exp));
  rep.exp = exp;
  return rep;
}

namespace {

void check_support(const AxisymGrid& g, const Box& b) {
  const bool inside = b.tau_hi < g.tau_max - 0.5 * g.h &&
                      b.z_lo > g.z_min + 0.5 * g.h &&
                      b.z_hi < g.z_max - 0.5 * g.h && b.tau_lo >= 0.0;
  if (!inside)
    throw ValidationError(
        "variation: support of Phi touches the grid boundary");
}

}  // namespace

double first_variation(const ScalarField& w, const GeneralEnergySpec& s,
                       const VectorFieldSpec& phi) {
  check_support(w.grid, phi.support);
  const AxisymGrid& g = w.grid;
  const auto grad = gradient_or_fd(w);

  Densities d = densities(w, s);
  std::vector<double> density(g.size(), 0.0);
  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      if (!w.mask[k]) continue;
      const double t = g.tau(i), z = g.z(j);
      if (!phi.support.contains(t, z)) continue;
      const Mat2 m = phi.dphi(t, z);
      const double div = divergence(phi, t, z, g.dim);
      const Vec2 gr = grad[k];
      const double gMg = dot(gr, apply(m, gr));
      const double edens = d.grad_part[k] + d.pot_part[k];
      density[k] = edens * div - 2.0 * s.G(w.values[k]) * gMg;
    }
  }
  FbSingularity fb{&d.vlin, s.fb_exponent};
  return integrate_masked(g, density, w.mask, d.singular ? &fb : nullptr);
}

double second_variation_closed_form(const ScalarField& w,
                                    const GeneralEnergySpec& s,
                                    const VectorFieldSpec& phi) {
  check_support(w.grid, phi.support);
  const AxisymGrid& g = w.grid;
  const auto grad = gradient_or_fd(w);

  Densities d = densities(w, s);
  std::vector<double> density(g.size(), 0.0);
  for (int i = 0; i < g.ntau; ++i) {
    for (int j = 0; j < g.nz; ++j) {
      const std::size_t k = g.index(i, j);
      if (!w.mask[k]) continue;
      const double t = g.tau(i), z = g.z(j);
      if (!phi.support.contains(t, z)) continue;

      const Mat2 m = phi.dphi(t, z);
      const Vec2 p = phi.phi(t, z);
      const double ratio = t > 0.0 ? p.tau / t : m.tt;  // phi_tau / tau
      const double ang = (g.dim - 2) * ratio;
      const double div = m.tt + m.zz + ang;
      const double tr2 = m.tt * m.tt + 2.0 * m.tz * m.zt + m.zz * m.zz +
                         (g.dim - 2) * ratio * ratio;

      const Vec2 gr = grad[k];
      const Vec2 mtg = apply_transpose(m, gr);
      const Vec2 mg = apply(m, gr);
      const double gMg = dot(gr, mg);
      const double gM2g = dot(gr, apply(m, mg));  // g . M^2 g

      const double edens = d.grad_part[k] + d.pot_part[k];
      density[k] = edens * 0.5 * (div * div - tr2) +
                   s.G(w.values[k]) *
                       (dot(mtg, mtg) + 2.0 * (gM2g - gMg * div));
    }
  }
  FbSingularity fb{&d.vlin, s.fb_exponent};
  return integrate_masked(g, density, w.mask, d.singular ? &fb : nullptr);
}

}  // namespace apfb
