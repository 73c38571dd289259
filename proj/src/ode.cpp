#include "apfb/ode.hpp"

#include <algorithm>
#include <cmath>

namespace apfb {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// y1 - yhat1 coefficients
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output coefficients (Hairer, Norsett, Wanner)
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

const DenseStep& OdeSolution::locate(double t) const {
  std::size_t lo = 0, hi = steps.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const DenseStep& s = steps[mid];
    if (t < s.t0)
      hi = mid == 0 ? 0 : mid - 1;
    else if (t > s.t0 + s.dt)
      lo = mid + 1;
    else
      return s;
  }
  return steps[std::min(lo, steps.size() - 1)];
}

void OdeSolution::eval(double t, double* y) const {
  const DenseStep& s = locate(t);
  const double th = std::clamp((t - s.t0) / s.dt, 0.0, 1.0);
  const double th1 = 1.0 - th;
  for (int i = 0; i < dim; ++i)
    y[i] = s.r1[i] +
           th * (s.r2[i] + th1 * (s.r3[i] + th * (s.r4[i] + th1 * s.r5[i])));
}

void OdeSolution::eval_derivative(double t, double* dy) const {
  const DenseStep& s = locate(t);
  const double th = std::clamp((t - s.t0) / s.dt, 0.0, 1.0);
  const double th1 = 1.0 - th;
  for (int i = 0; i < dim; ++i) {
    const double d = s.r2[i] + (1.0 - 2.0 * th) * s.r3[i] +
                     th * (2.0 - 3.0 * th) * s.r4[i] +
                     2.0 * th * th1 * (1.0 - 2.0 * th) * s.r5[i];
    dy[i] = d / s.dt;
  }
}

double OdeSolution::eval1(double t, int comp) const {
  double buf[8];
  eval(t, buf);
  return buf[comp];
}

OdeResult integrate_ode(const OdeRhs& rhs, double t0,
                        std::span<const double> y0, double t1,
                        const OdeOptions& opts, const OdeEvent* event) {
  const int n = static_cast<int>(y0.size());
  OdeResult res;
  res.sol.dim = n;
  res.sol.t_begin = t0;

  std::vector<double> y(y0.begin(), y0.end()), ynew(n), yerr(n), ysti(n);
  std::vector<std::vector<double>> k(7, std::vector<double>(n));

  rhs(t0, y.data(), k[0].data());
  double t = t0;
  double h = std::min(opts.h_init, opts.h_max);
  double g_prev = event ? (*event)(t, y.data()) : 0.0;

  int accepted = 0;
  for (int iter = 0; iter < opts.max_steps; ++iter) {
    if (t >= t1) break;
    h = std::min(h, t1 - t);
    if (h < opts.h_min)
      throw SolverError("integrate_ode: step size underflow at t=" +
                        std::to_string(t));

    auto stage = [&](double ci, std::initializer_list<double> as, int kk) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        int s = 0;
        for (double a : as) acc += a * k[s++][i];
        ysti[i] = y[i] + h * acc;
      }
      rhs(t + ci * h, ysti.data(), k[kk].data());
    };

    stage(c2, {a21}, 1);
    stage(c3, {a31, a32}, 2);
    stage(c4, {a41, a42, a43}, 3);
    stage(c5, {a51, a52, a53, a54}, 4);
    stage(1.0, {a61, a62, a63, a64, a65}, 5);
    for (int i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] +
                            b5 * k[4][i] + b6 * k[5][i]);
    rhs(t + h, ynew.data(), k[6].data());

    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ei = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] +
                             e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
      const double sc =
          opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / n);

    if (err <= 1.0) {
      // accept; store dense output
      DenseStep ds;
      ds.t0 = t;
      ds.dt = h;
      ds.r1.resize(n);
      ds.r2.resize(n);
      ds.r3.resize(n);
      ds.r4.resize(n);
      ds.r5.resize(n);
      for (int i = 0; i < n; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = h * k[0][i] - ydiff;
        ds.r1[i] = y[i];
        ds.r2[i] = ydiff;
        ds.r3[i] = bspl;
        ds.r4[i] = ydiff - h * k[6][i] - bspl;
        ds.r5[i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] +
                        d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
      }
      res.sol.steps.push_back(std::move(ds));
      ++accepted;

      t += h;
      std::swap(y, ynew);
      std::swap(k[0], k[6]);  // FSAL

      if (event) {
        const double g_now = (*event)(t, y.data());
        if (g_prev != 0.0 && g_now != 0.0 &&
            std::signbit(g_prev) != std::signbit(g_now)) {
          // bisect the dense output of the step just stored
          const DenseStep& s = res.sol.steps.back();
          double lo = s.t0, hi = s.t0 + s.dt;
          std::vector<double> ybuf(n);
          for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi);
               ++it) {
            const double mid = 0.5 * (lo + hi);
            res.sol.eval(mid, ybuf.data());
            const double gm = (*event)(mid, ybuf.data());
            if (gm == 0.0) {
              lo = hi = mid;
              break;
            }
            if (std::signbit(gm) == std::signbit(g_prev))
              lo = mid;
            else
              hi = mid;
          }
          res.event_hit = true;
          res.t_event = 0.5 * (lo + hi);
          res.y_event.resize(n);
          res.sol.eval(res.t_event, res.y_event.data());
          res.sol.t_end = t;
          res.steps_accepted = accepted;
          return res;
        }
        if (g_now == 0.0) {
          res.event_hit = true;
          res.t_event = t;
          res.y_event = y;
          res.sol.t_end = t;
          res.steps_accepted = accepted;
          return res;
        }
        g_prev = g_now;
      }

      const double fac = std::clamp(
          0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      h = std::min(h * fac, opts.h_max);
    } else {
      const double fac =
          std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
      h *= fac;
    }
  }

  if (t < t1)
    throw SolverError("integrate_ode: max step count exhausted");
  res.sol.t_end = t;
  res.steps_accepted = accepted;
  std::copy(y.begin(), y.end(),
            std::back_inserter(res.y_event));  // final state (no event)
  res.t_event = t;
  return res;
}

}  // namespace apfb
