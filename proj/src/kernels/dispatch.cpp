#include "apfb/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace apfb::kernels {

namespace {

Lane pick_auto() {
  if (const char* env = std::getenv("APFB_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Lane::scalar;
    if (std::strcmp(env, "avx2") == 0)
      return cpu_has_avx2() ? Lane::avx2 : Lane::scalar;
  }
  return cpu_has_avx2() && detail::avx2_ops() ? Lane::avx2 : Lane::scalar;
}

std::atomic<const detail::Ops*> g_ops{nullptr};
std::atomic<Lane> g_lane{Lane::scalar};

const detail::Ops& ops() {
  const detail::Ops* p = g_ops.load(std::memory_order_acquire);
  if (!p) {
    set_lane(pick_auto());
    p = g_ops.load(std::memory_order_acquire);
  }
  return *p;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

void set_lane(Lane lane) {
  if (lane == Lane::avx2 && cpu_has_avx2() && detail::avx2_ops()) {
    g_ops.store(detail::avx2_ops(), std::memory_order_release);
    g_lane.store(Lane::avx2, std::memory_order_release);
  } else {
    g_ops.store(&detail::scalar_ops(), std::memory_order_release);
    g_lane.store(Lane::scalar, std::memory_order_release);
  }
}

void reset_lane_auto() { set_lane(pick_auto()); }

Lane active_lane() {
  ops();
  return g_lane.load(std::memory_order_acquire);
}

std::string_view lane_name() {
  return active_lane() == Lane::avx2 ? "avx2" : "scalar";
}

double sum(std::span<const double> x) { return ops().sum(x.data(), x.size()); }

double dot(std::span<const double> a, std::span<const double> b) {
  return ops().dot(a.data(), b.data(), a.size());
}

double dot3(std::span<const double> a, std::span<const double> b,
            std::span<const double> c) {
  return ops().dot3(a.data(), b.data(), c.data(), a.size());
}

double weighted_sumsq(std::span<const double> w, std::span<const double> x) {
  return ops().weighted_sumsq(w.data(), x.data(), w.size());
}

void mul(std::span<const double> a, std::span<const double> b,
         std::span<double> out) {
  ops().mul(a.data(), b.data(), out.data(), a.size());
}

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
  ops().axpby(a, x.data(), b, y.data(), out.data(), x.size());
}

}  // namespace apfb::kernels
