#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fracsys/simd.hpp"

using namespace fracsys;

namespace {

struct Data {
  std::vector<double> w, u, v;
};

Data make_data(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 2.0), any(-3.0, 3.0);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    d.w.push_back(pos(rng));
    d.u.push_back(any(rng));
    d.v.push_back(any(rng));
  }
  return d;
}

// Reassociated sums agree to a few ulps of the sum of magnitudes.
void check_close(double got, double want, double magnitude) {
  CHECK(std::abs(got - want) <= 1e-14 * (magnitude + 1.0));
}

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(simd::table_for(simd::Isa::scalar) == &simd::scalar_table());
  CHECK(simd::scalar_table().isa == simd::Isa::scalar);
  CHECK(simd::isa_name(simd::Isa::scalar) == "scalar");
}

TEST_CASE("active table is one of the compiled variants") {
  const simd::KernelTable& a = simd::active();
  CHECK(simd::table_for(a.isa) == &a);
  MESSAGE("active isa: " << simd::isa_name(a.isa));
}

TEST_CASE("scalar reference kernels on small closed-form inputs") {
  const double w[3] = {1.0, 2.0, 3.0};
  const double u[3] = {1.0, 0.0, 2.0};
  const double v[3] = {0.0, 1.0, 1.0};
  const auto& t = simd::scalar_table();
  // sum w (u - 1) = 0 - 2 + 3
  CHECK(t.weighted_diff(w, u, 1.0, 3) == 1.0);
  // sum w (u - 1)^2 = 0 + 2 + 3
  CHECK(t.weighted_sq_diff(w, u, 1.0, 3) == 5.0);
  // sum w (u - 1)(v - 1) = 0 + 0 + 0
  CHECK(t.weighted_cross_diff(w, u, 1.0, v, 1.0, 3) == 0.0);
  CHECK(t.dot(w, u, 3) == 7.0);
  CHECK(t.dot(w, u, 0) == 0.0);
}

TEST_CASE("vector variants match the scalar reference") {
  std::mt19937_64 rng(7);
  const auto& ref = simd::scalar_table();
  for (simd::Isa isa : {simd::Isa::avx2, simd::Isa::neon}) {
    const simd::KernelTable* t = simd::table_for(isa);
    if (!t) {
      MESSAGE(simd::isa_name(isa) << " not available on this host");
      continue;
    }
    CAPTURE(simd::isa_name(isa));
    // Lengths cover empty input, partial vectors and unrolled main loops.
    for (std::size_t n = 0; n <= 70; ++n) {
      CAPTURE(n);
      const Data d = make_data(n, rng);
      const double uc = 0.25, vc = -0.5;
      double mag1 = 0, mag2 = 0, mag3 = 0, mag4 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        mag1 += d.w[i] * std::abs(d.u[i] - uc);
        mag2 += d.w[i] * (d.u[i] - uc) * (d.u[i] - uc);
        mag3 += d.w[i] * std::abs((d.u[i] - uc) * (d.v[i] - vc));
        mag4 += std::abs(d.w[i] * d.u[i]);
      }
      check_close(t->weighted_diff(d.w.data(), d.u.data(), uc, n), ref.weighted_diff(d.w.data(), d.u.data(), uc, n), mag1);
      check_close(t->weighted_sq_diff(d.w.data(), d.u.data(), uc, n),
                  ref.weighted_sq_diff(d.w.data(), d.u.data(), uc, n), mag2);
      check_close(t->weighted_cross_diff(d.w.data(), d.u.data(), uc, d.v.data(), vc, n),
                  ref.weighted_cross_diff(d.w.data(), d.u.data(), uc, d.v.data(), vc, n), mag3);
      check_close(t->dot(d.w.data(), d.u.data(), n), ref.dot(d.w.data(), d.u.data(), n), mag4);
    }
  }
}

TEST_CASE("vector variants handle large magnitudes and cancellation") {
  const simd::KernelTable* t = simd::table_for(simd::Isa::avx2);
  if (!t) t = simd::table_for(simd::Isa::neon);
  if (!t) return;
  std::vector<double> w(37, 1.0), u(37);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (i % 2 ? 1.0 : -1.0) * 1e8;
  const auto& ref = simd::scalar_table();
  CHECK(std::abs(t->weighted_diff(w.data(), u.data(), 0.0, 37) - ref.weighted_diff(w.data(), u.data(), 0.0, 37)) <= 1e-6);
  CHECK(t->weighted_sq_diff(w.data(), u.data(), 0.0, 37) == doctest::Approx(37e16).epsilon(1e-15));
}
