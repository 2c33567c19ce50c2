#include <cmath>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "doctest.h"
#include "fracsys/error.hpp"
#include "fracsys/nonlocal.hpp"
#include "fracsys/verification.hpp"

using namespace fracsys;

namespace {

SampledField periodic_1d(int N, std::function<double(double)> f) {
  return SampledField::from_function(
      GridSpec::periodic_box(1, N, 2 * std::numbers::pi, 16), 1, [&](auto x, auto o) { o[0] = f(x[0]); },
      ExteriorRule::periodic());
}

SampledField random_ball_field(const GridSpec& g, std::mt19937_64& rng, ExteriorRule rule) {
  std::normal_distribution<double> nd;
  return SampledField::from_function(g, 1, [&](auto, auto o) { o[0] = nd(rng); }, std::move(rule));
}

}  // namespace

TEST_CASE("L u = 0 exactly for constants") {
  for (const GridSpec& g : {GridSpec::ball(1, 1.0, 64), GridSpec::ball(2, 1.0, 16)}) {
    const NonlocalOperator op(make_fractional_kernel(g.dim, 0.4), g);
    const auto u = SampledField::from_function(g, 1, [](auto, auto o) { o[0] = 1.7; }, ExteriorRule::constant({1.7}));
    for (double v : op.apply(u, op.couple(u.exterior()))) CHECK(v == 0.0);
  }
  const auto p = periodic_1d(64, [](double) { return -2.0; });
  CHECK(apply_LK(p, make_fractional_kernel(1, 0.5), 5).value == 0.0);
}

TEST_CASE("condensed evaluation matches the direct offset loop") {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd A(2, 2);
  A << 1.2, 0.3, -0.2, 0.8;
  struct Case {
    KernelSpec k;
    GridSpec g;
    ExteriorRule rule;
  };
  const std::vector<Case> cases = {
      {make_fractional_kernel(1, 0.3), GridSpec::ball(1, 1.0, 64), ExteriorRule::sign()},
      {make_fractional_kernel(1, 0.8), GridSpec::ball(1, 1.0, 64), ExteriorRule::twist(1.3).component(1)},
      {make_anisotropic_kernel(A, 0.6), GridSpec::ball(2, 1.0, 12), ExteriorRule::radial_projection(2).component(0)},
      {make_fractional_kernel(1, 0.5), GridSpec::periodic_box(1, 64, 1.0, 4), ExteriorRule::periodic()},
  };
  for (const Case& c : cases) {
    const NonlocalOperator op(c.k, c.g);
    const SampledField u = random_ball_field(c.g, rng, c.rule);
    for (std::size_t node = 0; node < u.size(); node += 7) {
      const PointValue fast = apply_LK(op, u, node);
      const PointValue ref = apply_LK_reference(op, u, node);
      CHECK(fast.value == doctest::Approx(ref.value).epsilon(1e-11).scale(1.0));
    }
  }
}

TEST_CASE("cos(kx) is an eigenfunction up to 1%") {
  for (double s : {0.3, 0.5, 0.9}) {
    const auto u = periodic_1d(2048, [](double x) { return std::cos(3 * x); });
    const NonlocalOperator op(make_fractional_kernel(1, s), u.lattice_ptr());
    const auto Lu = op.apply(u, op.couple(u.exterior()));
    const double lam = std::pow(3.0, 2 * s);
    for (std::size_t i = 0; i < u.size(); i += 97) CHECK(std::abs(Lu[i] + lam * u.value(0, i)) <= 1e-2 * lam);
    CHECK(apply_fractional_laplacian(u, s, 10).value == doctest::Approx(lam * u.value(0, 10)).epsilon(1e-2));
  }
  const GridSpec g2 = GridSpec::periodic_box(2, 64, 2 * std::numbers::pi, 2);
  const auto v = SampledField::from_function(
      g2, 1, [](auto x, auto o) { o[0] = std::cos(x[0] + x[1]); }, ExteriorRule::periodic());
  const auto D = fractional_laplacian(NonlocalOperator(make_fractional_kernel(2, 0.5), g2), v);
  const double lam = std::pow(2.0, 0.5);
  for (std::size_t i = 0; i < v.size(); i += 131) CHECK(std::abs(D[i] - lam * v.value(0, i)) <= 1e-2 * lam);
}

TEST_CASE("odd linear data gives zero at the centre") {
  const GridSpec g = GridSpec::ball(1, 1.0, 128);
  const auto odd = ExteriorRule::callback(
      1, [](auto x, auto o) { o[0] = x[0]; }, [](auto d, auto o) { o[0] = d[0]; }, "odd");
  const auto u = SampledField::from_function(g, 1, [](auto x, auto o) { o[0] = x[0]; }, odd);
  const Lattice& lat = u.lattice();
  const std::size_t centre = lat.nearest(std::vector<double>{0.0});
  REQUIRE(lat.coord(centre, 0) == 0.0);
  CHECK(std::abs(apply_fractional_laplacian(u, 0.5, centre).value) < 1e-12);
}

TEST_CASE("(-Delta)^{1/2} of (1 - x^2)_+^{1/2} is flat, against an 8x denser oracle") {
  auto eval = [](int N) {
    const GridSpec g = GridSpec::ball(1, 1.0, N);
    const auto u = SampledField::from_function(
        g, 1, [](auto x, auto o) { o[0] = std::sqrt(std::max(0.0, 1.0 - x[0] * x[0])); }, ExteriorRule::zero());
    const auto D = fractional_laplacian(NonlocalOperator(make_fractional_kernel(1, 0.5), g), u);
    std::vector<double> out;
    for (double x : {0.0, 0.2, 0.4, 0.6}) out.push_back(D[u.lattice().nearest(std::vector<double>{x})]);
    return out;
  };
  const auto coarse = eval(512);
  const auto fine = eval(4096);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    CHECK(coarse[i] == doctest::Approx(coarse[0]).epsilon(2e-2));
    CHECK(fine[i] == doctest::Approx(fine[0]).epsilon(1e-2));
    CHECK(coarse[i] == doctest::Approx(fine[i]).epsilon(2e-2));
  }
  // The value itself is 1; only flatness is asserted above.
  MESSAGE("fine-grid value " << fine[0]);
}

TEST_CASE("bilinear form: constants, symmetry, positivity") {
  std::mt19937_64 rng(9);
  const GridSpec g = GridSpec::ball(1, 1.0, 64);
  const NonlocalOperator op(make_fractional_kernel(1, 0.6), g);
  const auto u = random_ball_field(g, rng, ExteriorRule::sign());
  const auto w = random_ball_field(g, rng, ExteriorRule::constant({0.2}));
  const auto c = SampledField::from_function(g, 1, [](auto, auto o) { o[0] = 3.0; }, ExteriorRule::constant({3.0}));
  for (std::size_t i = 0; i < u.size(); i += 5) {
    CHECK(bilinear_form(op, u, c, i) == 0.0);
    CHECK(bilinear_form(op, u, w, i) == bilinear_form(op, w, u, i));
    CHECK(bilinear_form(op, u, u, i) >= 0.0);
  }
  CHECK_THROWS_AS(bilinear_form(op, u, SampledField::from_function(GridSpec::ball(1, 1.0, 32), 1, [](auto, auto o) { o[0] = 0; },
                                                                    ExteriorRule::zero()),
                                0),
                  DomainError);
}

TEST_CASE("B(sin, sin)(0) = 4^{s-1}, tending to |u'(0)|^2 = 1") {
  // 2B(v,v) = (-Delta)^s v^2 ... at v(0) = 0 reduces to (-Delta)^s(cos 2x)(0) / 2.
  const auto u = periodic_1d(2048, [](double x) { return std::sin(x); });
  for (double s : {0.5, 0.9, 0.99}) {
    const double b = bilinear_form(u, u, make_fractional_kernel(1, s), 0);
    CHECK(b == doctest::Approx(std::pow(4.0, s - 1.0)).epsilon(1e-3));
  }
  CHECK(bilinear_form(u, u, make_fractional_kernel(1, 0.99), 0) == doctest::Approx(1.0).epsilon(3e-2));
}

TEST_CASE("smoothed sign satisfies (-Delta)^s Phi = Phi B(Phi, Phi) away from the jump") {
  const int n = 16;
  const GridSpec g = GridSpec::ball(1, 2.0, 4 * 16 * n);
  const SampledField phi = smoothed_sign_field(SmoothedSign{n}, g);
  const NonlocalOperator op(make_fractional_kernel(1, 0.5), g);
  const auto ext = op.couple(phi.exterior());
  const auto D = op.apply(phi, ext);
  const auto B = op.bilinear_self(phi, ext);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double x = std::abs(phi.lattice().coord(i, 0));
    if (x < 0.2 || x > 1.0) continue;
    worst = std::max(worst, std::abs(-D[i] - phi.value(0, i) * B[i]));
    scale = std::max(scale, std::abs(D[i]));
  }
  // Residual is O(1/n); the identity holds exactly only for the sign itself.
  CHECK(worst < 0.1 * scale);
}

TEST_CASE("comparison: u <= w with contact gives L u <= L w") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const GridSpec g = GridSpec::ball(2, 1.0, 14);
  const NonlocalOperator op(make_fractional_kernel(2, 0.5), g);
  const auto w = SampledField::from_function(g, 1, [&](auto, auto o) { o[0] = ud(rng); }, ExteriorRule::constant({1.0}));
  std::vector<double> uv(w.values().begin(), w.values().end());
  for (std::size_t i = 0; i < uv.size(); ++i) uv[i] -= (i == 3 ? 0.0 : ud(rng));
  const SampledField u(w.lattice_ptr(), 1, uv, ExteriorRule::constant({0.5}));
  CHECK(apply_LK(op, u, 3).value <= apply_LK(op, w, 3).value);
}

TEST_CASE("s-energy: constants, evenness, componentwise additivity") {
  const GridSpec g = GridSpec::ball(1, 1.0, 64);
  const NonlocalOperator op(make_fractional_kernel(1, 0.5), g);
  const auto c = SampledField::from_function(g, 1, [](auto, auto o) { o[0] = 2.0; }, ExteriorRule::constant({2.0}));
  CHECK(s_energy(op, c).total == 0.0);

  const auto u1 = SampledField::from_function(g, 1, [](auto x, auto o) { o[0] = std::sin(3 * x[0]); }, ExteriorRule::sign());
  const auto m1 = SampledField::from_function(
      g, 1, [](auto x, auto o) { o[0] = -std::sin(3 * x[0]); }, ExteriorRule::sign().scaled(-1.0, 1.0));
  const EnergyValue e = s_energy(op, u1);
  CHECK(e.interior_part >= 0.0);
  CHECK(e.tail_part >= 0.0);
  CHECK(e.total == doctest::Approx(e.interior_part + e.tail_part).epsilon(1e-15));
  CHECK(s_energy(op, m1).total == doctest::Approx(e.total).epsilon(1e-14));

  const auto u2 = SampledField::from_function(
      g, 1, [](auto x, auto o) { o[0] = std::cos(x[0]) * 0.5; }, ExteriorRule::twist(1.0).component(0));
  const auto both = SampledField::from_function(
      g, 2,
      [](auto x, auto o) {
        o[0] = std::sin(3 * x[0]);
        o[1] = std::cos(x[0]) * 0.5;
      },
      ExteriorRule::callback(
          2,
          [](auto x, auto o) {
            o[0] = x[0] > 0 ? 1.0 : -1.0;
            o[1] = std::cos(std::tanh(x[0]));
          },
          [](auto d, auto o) {
            o[0] = d[0];
            o[1] = std::cos(d[0]);
          },
          "pair"));
  // The twist's first component is cos(beta tanh x) with far field cos(+-beta).
  CHECK(s_energy(op, both).total == doctest::Approx(e.total + s_energy(op, u2).total).epsilon(1e-12));
}

TEST_CASE("spectral multiplier: eigenfunctions, constants, periodic only") {
  const auto u = periodic_1d(256, [](double x) { return std::cos(5 * x); });
  const auto S = spectral_apply(u, 0.35);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(S.value(0, i) == doctest::Approx(std::pow(5.0, 0.7) * u.value(0, i)).scale(1.0).epsilon(1e-12));
  const auto c = spectral_apply(periodic_1d(64, [](double) { return 4.0; }), 0.5);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c.value(0, i)) < 1e-13);
  const auto ball = SampledField::from_function(GridSpec::ball(1, 1.0, 16), 1, [](auto, auto o) { o[0] = 0; }, ExteriorRule::zero());
  CHECK_THROWS_AS(spectral_apply(ball, 0.5), DomainError);
}

TEST_CASE("band-limited random data: quadrature within 1% of the spectral multiplier") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<double> a(33), b(33);
  for (int k = 1; k <= 32; ++k) a[k] = ud(rng), b[k] = ud(rng);
  const auto u = periodic_1d(2048, [&](double x) {
    double v = 0.0;
    for (int k = 1; k <= 32; ++k) v += a[k] * std::cos(k * x) + b[k] * std::sin(k * x);
    return v;
  });
  const auto S = spectral_apply(u, 0.5);
  const auto D = fractional_laplacian(NonlocalOperator(make_fractional_kernel(1, 0.5), u.lattice_ptr()), u);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    err = std::max(err, std::abs(D[i] - S.value(0, i)));
    scale = std::max(scale, std::abs(S.value(0, i)));
  }
  CHECK(err <= 1e-2 * scale);
}

TEST_CASE("pointwise evaluation is safe from concurrent threads") {
  std::mt19937_64 rng(21);
  const GridSpec g = GridSpec::ball(1, 1.0, 256);
  const NonlocalOperator op(make_fractional_kernel(1, 0.7), g);
  const auto u = random_ball_field(g, rng, ExteriorRule::sign());
  std::vector<double> serial(u.size()), parallel(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) serial[i] = apply_LK(op, u, i).value;
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < u.size(); i += 4) parallel[i] = apply_LK(op, u, i).value;
    });
  for (auto& th : pool) th.join();
  CHECK(serial == parallel);
}

TEST_CASE("errors: bad nodes, mismatched grids") {
  const GridSpec g = GridSpec::ball(1, 1.0, 16);
  const auto u = SampledField::from_function(g, 1, [](auto, auto o) { o[0] = 1; }, ExteriorRule::constant({1.0}));
  CHECK_THROWS_AS(apply_LK(u, make_fractional_kernel(1, 0.5), u.size()), DomainError);
  CHECK_THROWS_AS(apply_LK(u, make_fractional_kernel(1, 0.5), 0, 1), DomainError);
  CHECK_THROWS_AS(apply_LK(NonlocalOperator(make_fractional_kernel(1, 0.5), GridSpec::ball(1, 1.0, 32)), u, 0), DomainError);
  CHECK_THROWS_AS(NonlocalOperator(make_fractional_kernel(2, 0.5), g), DomainError);
}
