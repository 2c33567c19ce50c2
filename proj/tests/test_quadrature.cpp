#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fracsys/error.hpp"
#include "fracsys/gauss.hpp"
#include "fracsys/quadrature.hpp"

using namespace fracsys;

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int order : {2, 4, 8, 16}) {
    const GaussRule& g = gauss_legendre(order);
    REQUIRE(g.nodes.size() == static_cast<std::size_t>(order));
    for (int p = 0; p < 2 * order; ++p) {
      double sum = 0.0;
      for (int i = 0; i < order; ++i) sum += g.weights[i] * std::pow(g.nodes[i], p);
      CHECK(sum == doctest::Approx(p % 2 ? 0.0 : 2.0 / (p + 1)).epsilon(1e-13));
    }
  }
  CHECK(&gauss_legendre(8) == &gauss_legendre(8));
}

TEST_CASE("1D near-field moment matches the closed form") {
  for (double s : {0.2, 0.5, 0.9}) {
    const double h = 0.01;
    const KernelSpec k = make_fractional_kernel(1, s);
    const auto q = QuadratureScheme::build(k, h, 40);
    // int_{-h}^{h} c |y|^{2 - 1 - 2s} dy
    const double exact = 2.0 * k.c_ns() * std::pow(h, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    CHECK(q.central_moments()[0] == doctest::Approx(exact).epsilon(1e-2));
    CHECK(q.singularity_order() == doctest::Approx(1 + 2 * s));
  }
}

TEST_CASE("2D near-field moments match a polar-coordinate oracle") {
  // c * int_{[-1,1]^2} y1^2 |y|^{-2-2s} dy at s = 0.75 over c (mpmath): 6.6471697294474997703
  const double s = 0.75, h = 0.05;
  const KernelSpec k = make_fractional_kernel(2, s);
  const auto q = QuadratureScheme::build(k, h, 20);
  const double exact = k.c_ns() * 6.6471697294474997703 * std::pow(h, 2.0 - 2.0 * s);
  CHECK(q.central_moments()[0] == doctest::Approx(exact).epsilon(1e-2));
  CHECK(q.central_moments()[1] == doctest::Approx(exact).epsilon(1e-2));
  CHECK(std::abs(q.central_moments()[2]) < 1e-12 * exact);
}

TEST_CASE("weights are nonnegative and even") {
  Eigen::MatrixXd A(2, 2);
  A << 1.3, 0.2, -0.1, 0.9;
  for (const KernelSpec& k : {make_fractional_kernel(1, 0.4), make_fractional_kernel(2, 0.6), make_anisotropic_kernel(A, 0.5)}) {
    const int r = 12;
    const auto q = QuadratureScheme::build(k, 0.1, r);
    const int r1 = k.dim() == 2 ? r : 0;
    for (int j = -r1; j <= r1; ++j)
      for (int i = -r; i <= r; ++i) {
        CHECK(q.weight(i, j) >= 0.0);
        CHECK(q.weight(i, j) == q.weight(-i, -j));
      }
    CHECK(q.weight(0, 0) == 0.0);
    double sum = q.tail_mass();
    for (double w : q.weights()) sum += w;
    CHECK(q.total_mass() == doctest::Approx(sum).epsilon(1e-14));
  }
}

TEST_CASE("tail mass equals the kernel mass beyond the truncation box") {
  // 1D: 2 int_T^inf c y^{-1-2s} dy = c T^{-2s} / s
  const double s = 0.3, h = 0.05;
  const int reach = 30;
  const KernelSpec k = make_fractional_kernel(1, s);
  const auto q = QuadratureScheme::build(k, h, reach);
  const double T = reach * h;
  CHECK(q.tail_mass() == doctest::Approx(k.c_ns() * std::pow(T, -2 * s) / s).epsilon(1e-12));
  CHECK(q.tail().size() == 2);
}

TEST_CASE("1D symbol approximates |xi|^{2s} for resolved frequencies") {
  const int N = 2048;
  const double h = 2 * std::numbers::pi / N;
  for (double s : {0.3, 0.5, 0.7, 0.9}) {
    const auto q = QuadratureScheme::build(make_fractional_kernel(1, s), h, 16 * N);
    for (double xi : {1.0, 3.0, 10.0, 20.0}) {
      const double x[1] = {xi};
      CHECK(q.symbol(x) == doctest::Approx(std::pow(xi, 2 * s)).epsilon(1e-3));
    }
  }
}

TEST_CASE("2D symbol approximates |xi|^{2s}") {
  const int N = 64;
  const double h = 2 * std::numbers::pi / N;
  const auto q = QuadratureScheme::build(make_fractional_kernel(2, 0.5), h, 2 * N);
  for (auto xi : {std::array<double, 2>{1, 0}, {1, 1}, {2, -1}}) {
    CHECK(q.symbol(xi) == doctest::Approx(std::pow(std::hypot(xi[0], xi[1]), 1.0)).epsilon(1e-2));
  }
}

TEST_CASE("invalid schemes are rejected") {
  CHECK_THROWS_AS(QuadratureScheme::build(make_fractional_kernel(1, 0.5), 0.0, 10), DomainError);
  CHECK_THROWS_AS(QuadratureScheme::build(make_fractional_kernel(1, 0.5), 0.1, 1), DomainError);
  CHECK_THROWS_AS(QuadratureScheme::build(make_fractional_kernel(3, 0.5), 0.1, 10), DomainError);
  // Strong stretch along (2, 1): the mixed moment exceeds the e2 moment.
  const double th = std::atan(0.5);
  Eigen::MatrixXd R(2, 2);
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Eigen::MatrixXd A = R * Eigen::Vector2d(40.0, 1.0).asDiagonal() * R.transpose();
  CHECK_THROWS_AS(QuadratureScheme::build(make_anisotropic_kernel(A, 0.5), 0.1, 10), DomainError);
}
