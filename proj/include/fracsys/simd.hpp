#pragma once

// Reduction kernels behind every nonlocal sum. Each kernel has a scalar
// reference implementation and vectorized variants; the variant is chosen once
// at runtime from the CPU feature set (override with FRACSYS_SIMD=scalar).

#include <cstddef>
#include <span>
#include <string_view>

namespace fracsys::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  /// sum_j w[j] * (u[j] - uc)
  double (*weighted_diff)(const double* w, const double* u, double uc, std::size_t n);
  /// sum_j w[j] * (u[j] - uc)^2
  double (*weighted_sq_diff)(const double* w, const double* u, double uc, std::size_t n);
  /// sum_j w[j] * (u[j] - uc) * (v[j] - vc)
  double (*weighted_cross_diff)(const double* w, const double* u, double uc, const double* v,
                                double vc, std::size_t n);
  /// sum_j a[j] * b[j]
  double (*dot)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the variant is not compiled in or the CPU lacks the feature.
const KernelTable* table_for(Isa isa);
/// The table used by the library.
const KernelTable& active();

std::string_view isa_name(Isa isa);

inline double weighted_diff(std::span<const double> w, std::span<const double> u, double uc) {
  return active().weighted_diff(w.data(), u.data(), uc, w.size());
}
inline double weighted_sq_diff(std::span<const double> w, std::span<const double> u, double uc) {
  return active().weighted_sq_diff(w.data(), u.data(), uc, w.size());
}
inline double weighted_cross_diff(std::span<const double> w, std::span<const double> u, double uc,
                                  std::span<const double> v, double vc) {
  return active().weighted_cross_diff(w.data(), u.data(), uc, v.data(), vc, w.size());
}

namespace detail {
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace fracsys::simd
