#include "apfb/vfield.hpp"

#include <cmath>

namespace apfb {

double bump3(double x, double c, double w) {
  const double s = (x - c) / w;
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q;
}

double bump3_d(double x, double c, double w) {
  const double s = (x - c) / w;
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return -6.0 * s * q * q / w;
}

double ScalarProbe::operator()(double tau, double z) const {
  return amp * bump3(tau, ctau, wtau) * bump3(z, cz, wz);
}

Vec2 ScalarProbe::grad(double tau, double z) const {
  return {amp * bump3_d(tau, ctau, wtau) * bump3(z, cz, wz),
          amp * bump3(tau, ctau, wtau) * bump3_d(z, cz, wz)};
}

}  // namespace apfb
