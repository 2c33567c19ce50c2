#pragma once

// Lattice weights for L_K u(x) = sum_k w_k (u(x + h k) - u(x)).
//
// Inside the central box [-h, h]^n the second difference u(x+y) + u(x-y) - 2u(x)
// is replaced by its quadratic model y^T H y, whose kernel moments become
// directional second differences. Outside it, g(y) / |y|^2 is interpolated with
// hat functions up to the truncation box [-T, T]^n. The kernel mass beyond the
// box is kept as a set of directional tail masses.

#include <array>
#include <span>
#include <vector>

#include "fracsys/kernel.hpp"

namespace fracsys {

struct TailDirection {
  std::array<double, 2> dir{1.0, 0.0};
  /// Integral of K over the part of the far cone attributed to `dir`.
  double mass = 0.0;
};

class QuadratureScheme {
 public:
  /// Weights on [-reach, reach]^n; the truncation box half-width is reach * h.
  static QuadratureScheme build(const KernelSpec& kernel, double h, int reach);

  int dim() const { return dim_; }
  int reach() const { return reach_; }
  double h() const { return h_; }
  /// Half-width of the near-field box handled by the second-difference rule.
  double near_radius() const { return h_; }
  double truncation() const { return reach_ * h_; }
  double singularity_order() const { return order_; }

  double weight(int k0, int k1 = 0) const {
    return weights_[static_cast<std::size_t>(dim_ == 2 ? k1 + reach_ : 0) * width() + (k0 + reach_)];
  }
  /// Row of weights for second offset k1, indexed by k0 + reach.
  const double* row(int k1) const {
    return weights_.data() + static_cast<std::size_t>(dim_ == 2 ? k1 + reach_ : 0) * width();
  }
  std::span<const double> weights() const { return weights_; }
  std::size_t width() const { return 2 * static_cast<std::size_t>(reach_) + 1; }

  /// Second moments of K over the central box: {M11, M22, M12}.
  const std::array<double, 3>& central_moments() const { return moments_; }
  std::span<const TailDirection> tail() const { return tail_; }
  double tail_mass() const { return tail_mass_; }
  /// Sum of all lattice weights plus the tail mass.
  double total_mass() const { return total_; }

  /// Discrete Fourier symbol sum_k w_k (1 - cos(h k . xi)) + tail mass.
  double symbol(std::span<const double> xi) const;

 private:
  int dim_ = 1;
  int reach_ = 0;
  double h_ = 0.0;
  double order_ = 0.0;
  std::vector<double> weights_;
  std::array<double, 3> moments_{};
  std::vector<TailDirection> tail_;
  double tail_mass_ = 0.0;
  double total_ = 0.0;
};

}  // namespace fracsys
