#pragma once

#include <vector>

namespace fracsys {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached per order; safe to call concurrently after first use of an order.
const GaussRule& gauss_legendre(int order);

}  // namespace fracsys
