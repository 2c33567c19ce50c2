#include "fracsys/enclosing_ball.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <list>
#include <numeric>
#include <random>

#include "fracsys/error.hpp"

namespace fracsys {
namespace {

using Point = Eigen::VectorXd;

struct Sphere {
  Point center;
  double r2 = -1.0;  // negative: empty ball

  bool contains(const Point& p) const {
    if (r2 < 0.0) return false;
    const double d2 = (p - center).squaredNorm();
    return d2 <= r2 * (1.0 + 1e-12) + 1e-28;
  }
};

// Smallest sphere with every support point on its boundary.
Sphere circumsphere(const std::vector<Point>& support, int dim) {
  Sphere s;
  if (support.empty()) return s;
  s.center = support[0];
  s.r2 = 0.0;
  const std::size_t k = support.size() - 1;
  if (k == 0) return s;
  Eigen::MatrixXd Q(dim, k);
  for (std::size_t i = 0; i < k; ++i) Q.col(i) = support[i + 1] - support[0];
  Eigen::MatrixXd G = 2.0 * Q.transpose() * Q;
  Eigen::VectorXd rhs = Q.colwise().squaredNorm().transpose();
  Eigen::VectorXd lam = G.colPivHouseholderQr().solve(rhs);
  s.center = support[0] + Q * lam;
  for (const Point& p : support) s.r2 = std::max(s.r2, (p - s.center).squaredNorm());
  return s;
}

void move_to_front(std::list<Point>& pts, std::list<Point>::iterator end, std::vector<Point>& support,
                   Sphere& ball, int dim) {
  ball = circumsphere(support, dim);
  if (support.size() == static_cast<std::size_t>(dim) + 1) return;
  for (auto it = pts.begin(); it != end;) {
    auto next = std::next(it);
    if (!ball.contains(*it)) {
      support.push_back(*it);
      move_to_front(pts, it, support, ball, dim);
      support.pop_back();
      pts.splice(pts.begin(), pts, it);
    }
    it = next;
  }
}

EnclosingBall heuristic_ball(const std::vector<Point>& pts) {
  // Ritter's seed, then core-set iteration c <- c + (far - c) / (i + 1).
  auto farthest = [&](const Point& from) {
    std::size_t best = 0;
    double d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double di = (pts[i] - from).squaredNorm();
      if (di > d) d = di, best = i;
    }
    return best;
  };
  const Point& a = pts[farthest(pts[0])];
  const Point& b = pts[farthest(a)];
  Point c = 0.5 * (a + b);
  for (int i = 1; i <= 2000; ++i) c += (pts[farthest(c)] - c) / (i + 1.0);
  EnclosingBall out;
  out.center.assign(c.data(), c.data() + c.size());
  out.radius = (pts[farthest(c)] - c).norm();
  out.exact = false;
  return out;
}

}  // namespace

EnclosingBall smallest_enclosing_ball(std::span<const double> points, int dim) {
  if (dim < 1 || points.empty() || points.size() % dim != 0)
    throw DomainError("enclosing ball needs a nonempty point set");
  const std::size_t count = points.size() / dim;
  std::vector<Point> pts(count);
  for (std::size_t i = 0; i < count; ++i)
    pts[i] = Eigen::Map<const Eigen::VectorXd>(points.data() + i * dim, dim);
  if (dim > 3) return heuristic_ball(pts);

  // A fixed shuffle keeps the expected linear running time and the result reproducible.
  std::mt19937_64 rng(0x5eed);
  std::shuffle(pts.begin(), pts.end(), rng);
  std::list<Point> lst(pts.begin(), pts.end());
  std::vector<Point> support;
  Sphere ball;
  move_to_front(lst, lst.end(), support, ball, dim);

  EnclosingBall out;
  out.center.assign(ball.center.data(), ball.center.data() + dim);
  double r2 = 0.0;
  for (const Point& p : pts) r2 = std::max(r2, (p - ball.center).squaredNorm());
  out.radius = std::sqrt(r2);
  return out;
}

double point_set_diameter(std::span<const double> points, int dim) {
  if (dim < 1 || points.size() % dim != 0) throw DomainError("malformed point set");
  const std::size_t count = points.size() / dim;
  if (count == 0) return 0.0;
  if (dim == 1) {
    auto [lo, hi] = std::minmax_element(points.begin(), points.end());
    return *hi - *lo;
  }
  std::vector<std::size_t> cand(count);
  std::iota(cand.begin(), cand.end(), 0);
  if (dim == 2) {
    // Only hull vertices can realize the diameter (Andrew's monotone chain).
    std::sort(cand.begin(), cand.end(), [&](std::size_t i, std::size_t j) {
      return std::pair(points[2 * i], points[2 * i + 1]) < std::pair(points[2 * j], points[2 * j + 1]);
    });
    auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
      return (points[2 * a] - points[2 * o]) * (points[2 * b + 1] - points[2 * o + 1]) -
             (points[2 * a + 1] - points[2 * o + 1]) * (points[2 * b] - points[2 * o]);
    };
    std::vector<std::size_t> hull;
    for (int pass = 0; pass < 2; ++pass) {
      const std::size_t base = hull.size();
      for (std::size_t idx = 0; idx < count; ++idx) {
        const std::size_t p = pass == 0 ? cand[idx] : cand[count - 1 - idx];
        while (hull.size() >= base + 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) hull.pop_back();
        hull.push_back(p);
      }
      hull.pop_back();
    }
    if (hull.empty()) hull.push_back(cand[0]);
    cand = std::move(hull);
  }
  double best = 0.0;
  for (std::size_t a = 0; a < cand.size(); ++a)
    for (std::size_t b = a + 1; b < cand.size(); ++b) {
      double d2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double d = points[cand[a] * dim + k] - points[cand[b] * dim + k];
        d2 += d * d;
      }
      best = std::max(best, d2);
    }
  return std::sqrt(best);
}

}  // namespace fracsys
