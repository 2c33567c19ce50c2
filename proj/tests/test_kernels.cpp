#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "fracsys/error.hpp"
#include "fracsys/kernel.hpp"

using namespace fracsys;

namespace {

std::vector<double> sample_points(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  std::vector<double> p;
  for (int i = 0; i < count; ++i)
    for (int a = 0; a < n; ++a) p.push_back(d(rng) + (a == 0 ? 1e-3 : 0.0));
  return p;
}

}  // namespace

TEST_CASE("normalization constant against mpmath values of the Gamma closed form") {
  CHECK(normalization_constant(1, 0.5).value == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(normalization_constant(2, 0.75).value == doctest::Approx(0.17116712969055234293).epsilon(1e-13));
  CHECK(normalization_constant(3, 0.5).value == doctest::Approx(0.10132118364233777144).epsilon(1e-13));
  CHECK(normalization_constant(1, 0.3).value == doctest::Approx(0.23009638168163209817).epsilon(1e-13));
  CHECK(normalization_constant(2, 0.5).value == doctest::Approx(0.5 / std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("normalization constant is positive and continuous in s") {
  for (int n : {1, 2}) {
    // c_{n,s} vanishes at both ends; c_n = c_{n,s} / (1 - s) increases with
    // steps below 0.04 on this sampling (mpmath).
    double prev = normalization_constant(n, 0.05).c_n();
    for (int i = 1; i < 95; ++i) {
      const auto nc = normalization_constant(n, 0.05 + 0.01 * i);
      CHECK(nc.value > 0.0);
      CHECK(nc.c_n() > prev);
      CHECK(nc.c_n() - prev < 0.04);
      prev = nc.c_n();
    }
  }
}

TEST_CASE("c_n tends to 4 Gamma(n/2 + 1) / pi^{n/2} as s -> 1") {
  CHECK(normalization_constant(1, 0.9999).c_n() == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(normalization_constant(2, 0.9999).c_n() == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-3));
}

TEST_CASE("fractional kernel in 1D at s = 1/2 decays like |y|^-2") {
  const KernelSpec k = make_fractional_kernel(1, 0.5);
  for (double y : {0.1, 0.7, 3.0, 50.0}) {
    const double v[1] = {y};
    CHECK(k(v) * y * y == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  }
  CHECK(k.lambda() == k.Lambda());
  CHECK(k.lambda() == doctest::Approx(2.0 / std::numbers::pi));
}

TEST_CASE("kernels are even, bit for bit") {
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.3, -0.4, 1.0;
  const std::vector<KernelSpec> kernels = {
      make_fractional_kernel(1, 0.3), make_fractional_kernel(2, 0.8), make_anisotropic_kernel(A, 0.6),
      make_custom_kernel(1, 0.4, [](double r) { return 0.2 + 0.1 * std::sin(r); }, 0.1 / 0.6, 0.3 / 0.6)};
  for (const KernelSpec& k : kernels) {
    const auto pts = sample_points(k.dim(), 200, 3);
    for (std::size_t i = 0; i < pts.size(); i += k.dim()) {
      std::vector<double> y(pts.begin() + i, pts.begin() + i + k.dim()), my = y;
      for (double& v : my) v = -v;
      CHECK(k(y) == k(my));
    }
  }
}

TEST_CASE("bounds check: fractional kernel attains both bounds") {
  const KernelSpec k = make_fractional_kernel(2, 0.75);
  const BoundsReport r = kernel_bounds_check(k, sample_points(2, 100, 1));
  CHECK(r.symmetric);
  CHECK(r.within_bounds);
  CHECK(r.worst_ratio == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("bounds check: halved profile with lambda = Lambda = c_n violates the lower bound") {
  const double s = 0.5;
  const auto nc = normalization_constant(1, s);
  const double c = nc.value;
  const KernelSpec k = make_custom_kernel(1, s, [c](double) { return 0.5 * c; }, nc.c_n(), nc.c_n());
  const BoundsReport r = kernel_bounds_check(k, sample_points(1, 50, 2));
  CHECK(r.symmetric);
  CHECK_FALSE(r.within_bounds);
  CHECK(r.worst_ratio == doctest::Approx(2.0));
}

TEST_CASE("bounds check: anisotropic diag(2,1) stays inside its singular-value bounds") {
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.0, 0.0, 1.0;
  const KernelSpec k = make_anisotropic_kernel(A, 0.6);
  const BoundsReport r = kernel_bounds_check(k, sample_points(2, 400, 4));
  CHECK(r.within_bounds);
  CHECK(r.worst_ratio <= 1.0 + 1e-12);
  // Extremes over the circle: directions e1 and e2.
  const double c = k.c_ns() / 2.0;
  const double e1[2] = {1.0, 0.0}, e2[2] = {0.0, 1.0};
  CHECK(k.profile(e1) == doctest::Approx(c * std::pow(2.0, 2.0 + 1.2)));
  CHECK(k.profile(e2) == doctest::Approx(c));
  CHECK(k.lambda() * (1 - 0.6) <= k.profile(e2) * (1 + 1e-12));
  CHECK(k.Lambda() * (1 - 0.6) >= k.profile(e1) * (1 - 1e-12));
}

TEST_CASE("anisotropic kernel with identity or rotation equals the fractional kernel") {
  const double s = 0.7;
  const KernelSpec iso = make_fractional_kernel(2, s);
  const double th = 0.6;
  Eigen::MatrixXd R(2, 2);
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  for (const Eigen::MatrixXd& A : {Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)), R}) {
    const KernelSpec k = make_anisotropic_kernel(A, s);
    CHECK(k.lambda() == doctest::Approx(iso.lambda()).epsilon(1e-12));
    CHECK(k.Lambda() == doctest::Approx(iso.Lambda()).epsilon(1e-12));
    const auto pts = sample_points(2, 100, 5);
    for (std::size_t i = 0; i < pts.size(); i += 2) {
      const double y[2] = {pts[i], pts[i + 1]};
      CHECK(k(y) == doctest::Approx(iso(y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("radial integral of the fractional profile matches the closed form") {
  const KernelSpec k = make_fractional_kernel(1, 0.4);
  const double th[1] = {1.0};
  // int_0^1 c r^{1 - 2s} dr = c / (2 - 2s)
  CHECK(k.radial_integral(th, 1.0 - 0.8, 0.0, 1.0) == doctest::Approx(k.c_ns() / 1.2).epsilon(1e-12));
  // int_2^inf c r^{-1-2s} dr = c 2^{-2s} / (2s)
  CHECK(k.radial_integral(th, -1.8, 2.0, INFINITY) == doctest::Approx(k.c_ns() * std::pow(2.0, -0.8) / 0.8).epsilon(1e-12));
  CHECK_THROWS_AS(k.radial_integral(th, -0.5, 1.0, INFINITY), DomainError);
}

TEST_CASE("invalid inputs are domain errors") {
  CHECK_THROWS_WITH_AS(make_fractional_kernel(1, 1.5), doctest::Contains("order parameter out of range"), DomainError);
  CHECK_THROWS_AS(make_fractional_kernel(1, 0.0), DomainError);
  CHECK_THROWS_AS(make_fractional_kernel(0, 0.5), DomainError);
  CHECK_THROWS_AS(make_anisotropic_kernel(Eigen::MatrixXd::Zero(2, 2), 0.5), DomainError);
  CHECK_THROWS_AS(make_custom_kernel(1, 0.5, [](double) { return 1.0; }, 2.0, 1.0), DomainError);
  const double origin[1] = {0.0};
  CHECK_THROWS_AS(make_fractional_kernel(1, 0.5)(origin), DomainError);
  CHECK_THROWS_AS(kernel_bounds_check(make_fractional_kernel(1, 0.5), {}), DomainError);
}
