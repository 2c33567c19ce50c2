#include "fracsys/simd.hpp"

namespace fracsys::simd {
namespace {

double weighted_diff(const double* w, const double* u, double uc, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += w[j] * (u[j] - uc);
  return acc;
}

double weighted_sq_diff(const double* w, const double* u, double uc, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = u[j] - uc;
    acc += w[j] * d * d;
  }
  return acc;
}

double weighted_cross_diff(const double* w, const double* u, double uc, const double* v, double vc,
                           std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += w[j] * ((u[j] - uc) * (v[j] - vc));
  return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

constexpr KernelTable kScalar{Isa::scalar, weighted_diff, weighted_sq_diff, weighted_cross_diff, dot};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace fracsys::simd
