#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace apfb::kernels {

// Runtime-selected arithmetic lanes. The scalar lane is the reference; the
// AVX2 lane must be bit-identical to it. To make that possible every
// reduction uses one fixed accumulation order: four interleaved partial-sum
// vectors of width four (a block of 16 elements), the tail zero-padded into
// one extra block, partials combined pairwise. Both lanes implement exactly
// that order, and the kernel translation units are built with
// -ffp-contract=off so no lane silently fuses multiply and add.
enum class Lane { scalar, avx2 };

// sum_i x[i]
double sum(std::span<const double> x);
// sum_i a[i] b[i]
double dot(std::span<const double> a, std::span<const double> b);
// sum_i a[i] b[i] c[i]
double dot3(std::span<const double> a, std::span<const double> b,
            std::span<const double> c);
// sum_i w[i] x[i]^2
double weighted_sumsq(std::span<const double> w, std::span<const double> x);

// out[i] = a[i] * b[i]
void mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out);
// out[i] = a x[i] + b y[i]
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);

bool cpu_has_avx2();
Lane active_lane();
std::string_view lane_name();

// Force a lane (tests, or APFB_SIMD=scalar|avx2 in the environment).
// Requesting avx2 on a CPU without it falls back to scalar.
void set_lane(Lane lane);
void reset_lane_auto();

namespace detail {
struct Ops {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  double (*weighted_sumsq)(const double*, const double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*axpby)(double, const double*, double, const double*, double*,
                std::size_t);
};
const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when not compiled in
}  // namespace detail

}  // namespace apfb::kernels
