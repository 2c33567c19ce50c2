#include "fracsys/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "fracsys/error.hpp"
#include "fracsys/gauss.hpp"

namespace fracsys {
namespace {

// Cells farther than this (in cells) from the origin use the low-order rule.
constexpr int kNearCells = 16;

// Angular rule: each octant split by a Gauss rule, so the kinks of the box
// boundary rho(theta) sit on panel edges.
template <typename F>
void for_each_direction(F&& f) {
  const GaussRule& g = gauss_legendre(16);
  const double half = std::numbers::pi / 8.0;
  for (int o = 0; o < 8; ++o) {
    const double mid = o * std::numbers::pi / 4.0 + half;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double t = mid + half * g.nodes[i];
      f(std::cos(t), std::sin(t), half * g.weights[i]);
    }
  }
}

}  // namespace

QuadratureScheme QuadratureScheme::build(const KernelSpec& kernel, double h, int reach) {
  const int n = kernel.dim();
  if (n != 1 && n != 2) throw DomainError("lattice quadrature supports dimensions 1 and 2");
  if (!(h > 0.0) || reach < 2) throw DomainError("quadrature needs h > 0 and reach >= 2");
  const double s = kernel.s();
  QuadratureScheme q;
  q.dim_ = n;
  q.reach_ = reach;
  q.h_ = h;
  q.order_ = n + 2.0 * s;
  const std::size_t W = q.width();
  q.weights_.assign(n == 2 ? W * W : W, 0.0);
  auto at = [&](int k0, int k1) -> double& {
    return q.weights_[static_cast<std::size_t>(n == 2 ? k1 + reach : 0) * W + (k0 + reach)];
  };
  const double T = reach * h;

  if (n == 1) {
    const double plus[1] = {1.0}, minus[1] = {-1.0};
    const double m11 = kernel.radial_integral(plus, 1.0 - 2.0 * s, 0.0, h) +
                       kernel.radial_integral(minus, 1.0 - 2.0 * s, 0.0, h);
    q.moments_ = {m11, 0.0, 0.0};
    at(1, 0) += 0.5 * m11 / (h * h);
    at(-1, 0) += 0.5 * m11 / (h * h);
    for (int side : {1, -1}) {
      for (int j = 1; j < reach; ++j) {
        const GaussRule& g = gauss_legendre(j <= kNearCells ? 8 : 4);
        const double a = j * h;
        double left = 0.0, right = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
          const double u = 0.5 * (g.nodes[i] + 1.0);
          const double y[1] = {side * (a + u * h)};
          const double f = 0.5 * h * g.weights[i] * y[0] * y[0] * kernel(y);
          left += f * (1.0 - u);
          right += f * u;
        }
        at(side * j, 0) += left / (a * a);
        at(side * (j + 1), 0) += right / ((a + h) * (a + h));
      }
      const double dir[1] = {double(side)};
      const double m = kernel.radial_integral(dir, -1.0 - 2.0 * s, T, INFINITY);
      q.tail_.push_back({{double(side), 0.0}, m});
    }
  } else {
    std::array<double, 3> M{};
    for_each_direction([&](double c, double sn, double w) {
      const double theta[2] = {c, sn};
      const double rho = h / std::max(std::abs(c), std::abs(sn));
      const double base = w * kernel.radial_integral(theta, 1.0 - 2.0 * s, 0.0, rho);
      M[0] += base * c * c;
      M[1] += base * sn * sn;
      M[2] += base * c * sn;
    });
    q.moments_ = M;
    // y^T H y against the moments, written as second differences along
    // e1, e2, e1 + e2 and e1 - e2 with nonnegative coefficients.
    const double a_plus = std::max(0.5 * M[2], 0.0);
    const double a_minus = std::max(-0.5 * M[2], 0.0);
    const double a1 = 0.5 * M[0] - a_plus - a_minus;
    const double a2 = 0.5 * M[1] - a_plus - a_minus;
    if (a1 < 0.0 || a2 < 0.0)
      throw DomainError("kernel too anisotropic for the positive near-field stencil at this spacing");
    const double inv_h2 = 1.0 / (h * h);
    for (int sg : {1, -1}) {
      at(sg, 0) += a1 * inv_h2;
      at(0, sg) += a2 * inv_h2;
      at(sg, sg) += a_plus * inv_h2;
      at(sg, -sg) += a_minus * inv_h2;
    }
    const GaussRule& g_near = gauss_legendre(4);
    const GaussRule& g_far = gauss_legendre(2);
    for (int j = -reach; j < reach; ++j)
      for (int i = -reach; i < reach; ++i) {
        if ((i == -1 || i == 0) && (j == -1 || j == 0)) continue;
        const int dist = std::max(std::max(std::abs(i), std::abs(i + 1)), std::max(std::abs(j), std::abs(j + 1)));
        const GaussRule& g = dist <= kNearCells ? g_near : g_far;
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t p = 0; p < g.nodes.size(); ++p) {
          const double u = 0.5 * (g.nodes[p] + 1.0);
          for (std::size_t r = 0; r < g.nodes.size(); ++r) {
            const double v = 0.5 * (g.nodes[r] + 1.0);
            const double y[2] = {(i + u) * h, (j + v) * h};
            const double f = 0.25 * h * h * g.weights[p] * g.weights[r] * (y[0] * y[0] + y[1] * y[1]) * kernel(y);
            acc[0] += f * (1.0 - u) * (1.0 - v);
            acc[1] += f * u * (1.0 - v);
            acc[2] += f * (1.0 - u) * v;
            acc[3] += f * u * v;
          }
        }
        for (int corner = 0; corner < 4; ++corner) {
          const int k0 = i + (corner & 1), k1 = j + (corner >> 1);
          at(k0, k1) += acc[corner] / ((double(k0) * k0 + double(k1) * k1) * h * h);
        }
      }
    for_each_direction([&](double c, double sn, double w) {
      const double theta[2] = {c, sn};
      const double rho = T / std::max(std::abs(c), std::abs(sn));
      q.tail_.push_back({{c, sn}, w * kernel.radial_integral(theta, -1.0 - 2.0 * s, rho, INFINITY)});
    });
  }

  // Kernel symmetry makes w_k = w_{-k} in exact arithmetic; enforce it bitwise.
  const std::size_t total = q.weights_.size();
  for (std::size_t i = 0; i < total / 2; ++i) {
    const double avg = 0.5 * (q.weights_[i] + q.weights_[total - 1 - i]);
    q.weights_[i] = q.weights_[total - 1 - i] = avg;
  }
  q.weights_[total / 2] = 0.0;
  for (double w : q.weights_)
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("quadrature produced a negative or nonfinite weight");
  for (const auto& t : q.tail_) q.tail_mass_ += t.mass;
  q.total_ = q.tail_mass_;
  for (double w : q.weights_) q.total_ += w;
  return q;
}

double QuadratureScheme::symbol(std::span<const double> xi) const {
  double acc = tail_mass_;
  const int r1 = dim_ == 2 ? reach_ : 0;
  for (int k1 = -r1; k1 <= r1; ++k1) {
    const double* w = row(k1);
    for (int k0 = -reach_; k0 <= reach_; ++k0) {
      const double wk = w[k0 + reach_];
      if (wk == 0.0) continue;
      const double phase = h_ * (k0 * xi[0] + (dim_ == 2 ? k1 * xi[1] : 0.0));
      acc += wk * (1.0 - std::cos(phase));
    }
  }
  return acc;
}

}  // namespace fracsys
