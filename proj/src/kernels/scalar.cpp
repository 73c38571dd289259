#include "apfb/kernels.hpp"

#include <array>
#include <cstring>

// Reference lane. The blocked accumulation below *defines* the summation
// order all other lanes must reproduce bit for bit.

namespace apfb::kernels::detail {
namespace {

constexpr std::size_t kWidth = 4;   // vector width (doubles)
constexpr std::size_t kAccs = 4;    // interleaved accumulators
constexpr std::size_t kBlock = kWidth * kAccs;

struct Accum {
  double acc[kAccs][kWidth] = {};

  void add_block(const double* p) {
    for (std::size_t k = 0; k < kAccs; ++k)
      for (std::size_t w = 0; w < kWidth; ++w) acc[k][w] += p[k * kWidth + w];
  }

  double combine() const {
    double t[kWidth];
    for (std::size_t w = 0; w < kWidth; ++w) {
      const double a = acc[0][w] + acc[1][w];
      const double b = acc[2][w] + acc[3][w];
      t[w] = a + b;
    }
    return (t[0] + t[1]) + (t[2] + t[3]);
  }
};

template <class MakeProduct>
double reduce(std::size_t n, MakeProduct make) {
  Accum acc;
  double buf[kBlock];
  std::size_t i = 0;
  for (; i + kBlock <= n; i += kBlock) {
    for (std::size_t j = 0; j < kBlock; ++j) buf[j] = make(i + j);
    acc.add_block(buf);
  }
  if (i < n) {
    std::size_t j = 0;
    for (; i + j < n; ++j) buf[j] = make(i + j);
    for (; j < kBlock; ++j) buf[j] = 0.0;
    acc.add_block(buf);
  }
  return acc.combine();
}

double sum_impl(const double* x, std::size_t n) {
  return reduce(n, [&](std::size_t i) { return x[i]; });
}

double dot_impl(const double* a, const double* b, std::size_t n) {
  return reduce(n, [&](std::size_t i) { return a[i] * b[i]; });
}

double dot3_impl(const double* a, const double* b, const double* c,
                 std::size_t n) {
  return reduce(n, [&](std::size_t i) { return (a[i] * b[i]) * c[i]; });
}

double weighted_sumsq_impl(const double* w, const double* x, std::size_t n) {
  return reduce(n, [&](std::size_t i) { return (x[i] * x[i]) * w[i]; });
}

void mul_impl(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpby_impl(double a, const double* x, double b, const double* y,
                double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = a * x[i];
    const double by = b * y[i];
    out[i] = ax + by;
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{sum_impl,       dot_impl, dot3_impl,
                       weighted_sumsq_impl, mul_impl, axpby_impl};
  return ops;
}

}  // namespace apfb::kernels::detail
