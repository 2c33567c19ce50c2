// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "fracsys/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace fracsys::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double weighted_diff(const double* w, const double* u, double uc, std::size_t n) {
  const __m256d c = _mm256_set1_pd(uc);
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), _mm256_sub_pd(_mm256_loadu_pd(u + j), c), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + j + 4), _mm256_sub_pd(_mm256_loadu_pd(u + j + 4), c), a1);
  }
  for (; j + 4 <= n; j += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), _mm256_sub_pd(_mm256_loadu_pd(u + j), c), a0);
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; j < n; ++j) acc += w[j] * (u[j] - uc);
  return acc;
}

double weighted_sq_diff(const double* w, const double* u, double uc, std::size_t n) {
  const __m256d c = _mm256_set1_pd(uc);
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(u + j), c);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(u + j + 4), c);
    a0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + j), d0), d0, a0);
    a1 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + j + 4), d1), d1, a1);
  }
  for (; j + 4 <= n; j += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(u + j), c);
    a0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + j), d0), d0, a0);
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; j < n; ++j) {
    const double d = u[j] - uc;
    acc += w[j] * d * d;
  }
  return acc;
}

double weighted_cross_diff(const double* w, const double* u, double uc, const double* v, double vc,
                           std::size_t n) {
  const __m256d cu = _mm256_set1_pd(uc);
  const __m256d cv = _mm256_set1_pd(vc);
  __m256d a0 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d du = _mm256_sub_pd(_mm256_loadu_pd(u + j), cu);
    const __m256d dv = _mm256_sub_pd(_mm256_loadu_pd(v + j), cv);
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), _mm256_mul_pd(du, dv), a0);
  }
  double acc = hsum(a0);
  for (; j < n; ++j) acc += w[j] * ((u[j] - uc) * (v[j] - vc));
  return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4), a1);
  }
  for (; j + 4 <= n; j += 4) a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), a0);
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

constexpr KernelTable kAvx2{Isa::avx2, weighted_diff, weighted_sq_diff, weighted_cross_diff, dot};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace fracsys::simd::detail

#else

namespace fracsys::simd::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace fracsys::simd::detail

#endif
