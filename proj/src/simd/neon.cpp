#include "fracsys/simd.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace fracsys::simd::detail {
namespace {

double weighted_diff(const double* w, const double* u, double uc, std::size_t n) {
  const float64x2_t c = vdupq_n_f64(uc);
  float64x2_t a0 = vdupq_n_f64(0.0);
  float64x2_t a1 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    a0 = vfmaq_f64(a0, vld1q_f64(w + j), vsubq_f64(vld1q_f64(u + j), c));
    a1 = vfmaq_f64(a1, vld1q_f64(w + j + 2), vsubq_f64(vld1q_f64(u + j + 2), c));
  }
  double acc = vaddvq_f64(vaddq_f64(a0, a1));
  for (; j < n; ++j) acc += w[j] * (u[j] - uc);
  return acc;
}

double weighted_sq_diff(const double* w, const double* u, double uc, std::size_t n) {
  const float64x2_t c = vdupq_n_f64(uc);
  float64x2_t a0 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(u + j), c);
    a0 = vfmaq_f64(a0, vmulq_f64(vld1q_f64(w + j), d), d);
  }
  double acc = vaddvq_f64(a0);
  for (; j < n; ++j) {
    const double d = u[j] - uc;
    acc += w[j] * d * d;
  }
  return acc;
}

double weighted_cross_diff(const double* w, const double* u, double uc, const double* v, double vc,
                           std::size_t n) {
  const float64x2_t cu = vdupq_n_f64(uc);
  const float64x2_t cv = vdupq_n_f64(vc);
  float64x2_t a0 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t du = vsubq_f64(vld1q_f64(u + j), cu);
    const float64x2_t dv = vsubq_f64(vld1q_f64(v + j), cv);
    a0 = vfmaq_f64(a0, vld1q_f64(w + j), vmulq_f64(du, dv));
  }
  double acc = vaddvq_f64(a0);
  for (; j < n; ++j) acc += w[j] * ((u[j] - uc) * (v[j] - vc));
  return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) a0 = vfmaq_f64(a0, vld1q_f64(a + j), vld1q_f64(b + j));
  double acc = vaddvq_f64(a0);
  for (; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

constexpr KernelTable kNeon{Isa::neon, weighted_diff, weighted_sq_diff, weighted_cross_diff, dot};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace fracsys::simd::detail

#else

namespace fracsys::simd::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace fracsys::simd::detail

#endif
