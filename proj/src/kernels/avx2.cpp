#include "apfb/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstring>

// AVX2 lane. Mirrors the blocked order of the scalar reference exactly:
// four __m256d accumulators over 16-element blocks, zero-padded tail,
// pairwise combine. Multiplies and adds are issued as separate instructions
// (no FMA) so each elementary operation rounds identically to the scalar
// lane, making the two lanes bit-equal.

namespace apfb::kernels::detail {
namespace {

constexpr std::size_t kBlock = 16;

struct Accum4 {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  __m256d a2 = _mm256_setzero_pd();
  __m256d a3 = _mm256_setzero_pd();

  void add(__m256d v0, __m256d v1, __m256d v2, __m256d v3) {
    a0 = _mm256_add_pd(a0, v0);
    a1 = _mm256_add_pd(a1, v1);
    a2 = _mm256_add_pd(a2, v2);
    a3 = _mm256_add_pd(a3, v3);
  }

  double combine() const {
    const __m256d s01 = _mm256_add_pd(a0, a1);
    const __m256d s23 = _mm256_add_pd(a2, a3);
    const __m256d t = _mm256_add_pd(s01, s23);
    alignas(32) double lane[4];
    _mm256_store_pd(lane, t);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
  }
};

template <class LoadBlock>
double reduce(std::size_t n, std::size_t stride_hint, LoadBlock load) {
  (void)stride_hint;
  Accum4 acc;
  std::size_t i = 0;
  for (; i + kBlock <= n; i += kBlock) {
    __m256d v0, v1, v2, v3;
    load(i, /*tail_len=*/kBlock, v0, v1, v2, v3);
    acc.add(v0, v1, v2, v3);
  }
  if (i < n) {
    __m256d v0, v1, v2, v3;
    load(i, n - i, v0, v1, v2, v3);
    acc.add(v0, v1, v2, v3);
  }
  return acc.combine();
}

inline void load_padded(const double* p, std::size_t len, __m256d& v0,
                        __m256d& v1, __m256d& v2, __m256d& v3) {
  if (len >= kBlock) {
    v0 = _mm256_loadu_pd(p);
    v1 = _mm256_loadu_pd(p + 4);
    v2 = _mm256_loadu_pd(p + 8);
    v3 = _mm256_loadu_pd(p + 12);
    return;
  }
  alignas(32) double buf[kBlock] = {};
  std::memcpy(buf, p, len * sizeof(double));
  v0 = _mm256_load_pd(buf);
  v1 = _mm256_load_pd(buf + 4);
  v2 = _mm256_load_pd(buf + 8);
  v3 = _mm256_load_pd(buf + 12);
}

double sum_impl(const double* x, std::size_t n) {
  return reduce(n, 1, [&](std::size_t i, std::size_t len, __m256d& v0,
                          __m256d& v1, __m256d& v2, __m256d& v3) {
    load_padded(x + i, len, v0, v1, v2, v3);
  });
}

double dot_impl(const double* a, const double* b, std::size_t n) {
  return reduce(n, 2, [&](std::size_t i, std::size_t len, __m256d& v0,
                          __m256d& v1, __m256d& v2, __m256d& v3) {
    __m256d x0, x1, x2, x3, y0, y1, y2, y3;
    load_padded(a + i, len, x0, x1, x2, x3);
    load_padded(b + i, len, y0, y1, y2, y3);
    v0 = _mm256_mul_pd(x0, y0);
    v1 = _mm256_mul_pd(x1, y1);
    v2 = _mm256_mul_pd(x2, y2);
    v3 = _mm256_mul_pd(x3, y3);
  });
}

double dot3_impl(const double* a, const double* b, const double* c,
                 std::size_t n) {
  return reduce(n, 3, [&](std::size_t i, std::size_t len, __m256d& v0,
                          __m256d& v1, __m256d& v2, __m256d& v3) {
    __m256d x0, x1, x2, x3, y0, y1, y2, y3, z0, z1, z2, z3;
    load_padded(a + i, len, x0, x1, x2, x3);
    load_padded(b + i, len, y0, y1, y2, y3);
    load_padded(c + i, len, z0, z1, z2, z3);
    v0 = _mm256_mul_pd(_mm256_mul_pd(x0, y0), z0);
    v1 = _mm256_mul_pd(_mm256_mul_pd(x1, y1), z1);
    v2 = _mm256_mul_pd(_mm256_mul_pd(x2, y2), z2);
    v3 = _mm256_mul_pd(_mm256_mul_pd(x3, y3), z3);
  });
}

double weighted_sumsq_impl(const double* w, const double* x, std::size_t n) {
  return reduce(n, 2, [&](std::size_t i, std::size_t len, __m256d& v0,
                          __m256d& v1, __m256d& v2, __m256d& v3) {
    __m256d w0, w1, w2, w3, x0, x1, x2, x3;
    load_padded(w + i, len, w0, w1, w2, w3);
    load_padded(x + i, len, x0, x1, x2, x3);
    v0 = _mm256_mul_pd(_mm256_mul_pd(x0, x0), w0);
    v1 = _mm256_mul_pd(_mm256_mul_pd(x1, x1), w1);
    v2 = _mm256_mul_pd(_mm256_mul_pd(x2, x2), w2);
    v3 = _mm256_mul_pd(_mm256_mul_pd(x3, x3), w3);
  });
}

void mul_impl(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(a + i);
    const __m256d y = _mm256_loadu_pd(b + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(x, y));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpby_impl(double a, const double* x, double b, const double* y,
                double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) {
    const double ax = a * x[i];
    const double by = b * y[i];
    out[i] = ax + by;
  }
}

}  // namespace

const Ops* avx2_ops() {
  static const Ops ops{sum_impl,       dot_impl, dot3_impl,
                       weighted_sumsq_impl, mul_impl, axpby_impl};
  return &ops;
}

}  // namespace apfb::kernels::detail

#else

namespace apfb::kernels::detail {
const Ops* avx2_ops() { return nullptr; }
}  // namespace apfb::kernels::detail

#endif
