#include "fracsys/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracsys/enclosing_ball.hpp"
#include "fracsys/error.hpp"

namespace fracsys {
namespace {

int floor_mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

// ---------------------------------------------------------------- GridSpec

GridSpec GridSpec::ball(int dim, double radius, int nodes_across, double truncation_factor) {
  if (nodes_across < 2) throw DomainError("ball grid needs at least two cells across");
  GridSpec g;
  g.dim = dim;
  g.radius = radius;
  g.h = 2.0 * radius / nodes_across;
  g.truncation_radius = truncation_factor * radius;
  g.validate();
  return g;
}

GridSpec GridSpec::periodic_box(int dim, int nodes, double period, int periods) {
  if (nodes < 4) throw DomainError("periodic grid needs at least four nodes per axis");
  GridSpec g;
  g.dim = dim;
  g.periodic = true;
  g.nodes_per_axis = nodes;
  g.h = period / nodes;
  g.radius = 0.5 * period;
  g.truncation_radius = periods * period;
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) throw DomainError("grids are one- or two-dimensional");
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid spacing must be positive");
  if (!(radius > 0.0)) throw DomainError("interior radius must be positive");
  if (!(truncation_radius >= 4.0 * radius * (1.0 - 1e-12)))
    throw DomainError("truncation radius must be at least four interior radii");
  if (periodic && nodes_per_axis < 4) throw DomainError("periodic grid needs nodes_per_axis >= 4");
}

// ---------------------------------------------------------------- Lattice

Lattice::Lattice(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  if (grid_.periodic) {
    const int N = grid_.nodes_per_axis;
    const int rows = grid_.dim == 2 ? N : 1;
    index_.reserve(static_cast<std::size_t>(N) * rows);
    for (int r = 0; r < rows; ++r) {
      runs_.push_back({r, 0, N, index_.size()});
      for (int i = 0; i < N; ++i) index_.push_back({i, r});
    }
    return;
  }
  // |j h| < R, decided on the integer lattice with a relative guard against rounding.
  const double lim = grid_.radius / grid_.h;
  const double lim2 = lim * lim * (1.0 - 1e-12);
  const int reach = static_cast<int>(std::ceil(lim));
  if (grid_.dim == 1) {
    const int lo = -reach, hi = reach;
    int begin = hi + 1, end = lo;
    for (int i = lo; i <= hi; ++i)
      if (double(i) * i < lim2) begin = std::min(begin, i), end = std::max(end, i + 1);
    runs_.push_back({0, begin, end, 0});
    for (int i = begin; i < end; ++i) index_.push_back({i, 0});
    row_min_ = 0;
    run_of_row_ = {0};
  } else {
    row_min_ = -reach;
    run_of_row_.assign(2 * reach + 1, -1);
    for (int r = -reach; r <= reach; ++r) {
      int begin = reach + 1, end = -reach;
      for (int i = -reach; i <= reach; ++i)
        if (double(i) * i + double(r) * r < lim2) begin = std::min(begin, i), end = std::max(end, i + 1);
      if (begin >= end) continue;
      run_of_row_[r - row_min_] = static_cast<int>(runs_.size());
      runs_.push_back({r, begin, end, index_.size()});
      for (int i = begin; i < end; ++i) index_.push_back({i, r});
    }
  }
  if (index_.empty()) throw DomainError("grid has no interior nodes");
}

std::array<double, 2> Lattice::position(std::size_t node) const {
  return {index_[node][0] * grid_.h, grid_.dim == 2 ? index_[node][1] * grid_.h : 0.0};
}

std::optional<std::size_t> Lattice::find(NodeIndex idx) const {
  if (grid_.dim == 1) idx[1] = 0;
  if (grid_.periodic) {
    const int N = grid_.nodes_per_axis;
    const int i = floor_mod(idx[0], N);
    const int r = grid_.dim == 2 ? floor_mod(idx[1], N) : 0;
    return static_cast<std::size_t>(r) * N + i;
  }
  const int slot = idx[1] - row_min_;
  if (slot < 0 || slot >= static_cast<int>(run_of_row_.size()) || run_of_row_[slot] < 0) return std::nullopt;
  const Run& run = runs_[run_of_row_[slot]];
  if (idx[0] < run.begin || idx[0] >= run.end) return std::nullopt;
  return run.offset + static_cast<std::size_t>(idx[0] - run.begin);
}

std::size_t Lattice::nearest(std::span<const double> x) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < index_.size(); ++i) {
    double d = 0.0;
    for (int a = 0; a < grid_.dim; ++a) {
      const double t = coord(i, a) - x[a];
      d += t * t;
    }
    if (d < best_d) best_d = d, best = i;
  }
  return best;
}

// ---------------------------------------------------------------- ExteriorRule

ExteriorRule ExteriorRule::zero(int m) {
  ExteriorRule r;
  r.kind_ = Kind::zero;
  r.m_ = m;
  r.name_ = "zero";
  r.constant_.assign(m, 0.0);
  return r;
}

ExteriorRule ExteriorRule::constant(std::vector<double> value) {
  if (value.empty()) throw DomainError("constant exterior rule needs a value");
  for (double v : value)
    if (!std::isfinite(v)) throw DomainError("constant exterior rule must be finite");
  ExteriorRule r;
  r.kind_ = Kind::constant;
  r.m_ = static_cast<int>(value.size());
  r.name_ = "constant";
  r.constant_ = std::move(value);
  return r;
}

ExteriorRule ExteriorRule::sign() {
  ExteriorRule r;
  r.kind_ = Kind::sign;
  r.m_ = 1;
  r.name_ = "sign";
  r.value_ = [](std::span<const double> x, std::span<double> out) { out[0] = sign_of(x[0]); };
  r.far_ = r.value_;
  return r;
}

ExteriorRule ExteriorRule::radial_projection(int n) {
  ExteriorRule r;
  r.kind_ = Kind::radial_projection;
  r.m_ = n;
  r.name_ = "radial_projection";
  r.value_ = [n](std::span<const double> x, std::span<double> out) {
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += x[i] * x[i];
    norm = std::sqrt(norm);
    for (int i = 0; i < n; ++i) out[i] = norm > 0.0 ? x[i] / norm : 0.0;
  };
  r.far_ = r.value_;
  return r;
}

ExteriorRule ExteriorRule::twist(double beta) {
  ExteriorRule r;
  r.kind_ = Kind::twist;
  r.m_ = 2;
  r.name_ = "twist";
  r.value_ = [beta](std::span<const double> x, std::span<double> out) {
    const double a = beta * std::tanh(x[0]);
    out[0] = std::cos(a);
    out[1] = std::sin(a);
  };
  r.far_ = [beta](std::span<const double> dir, std::span<double> out) {
    const double a = beta * sign_of(dir[0]);
    out[0] = std::cos(a);
    out[1] = std::sin(a);
  };
  return r;
}

ExteriorRule ExteriorRule::periodic(int m) {
  ExteriorRule r;
  r.kind_ = Kind::periodic;
  r.m_ = m;
  r.name_ = "periodic";
  return r;
}

ExteriorRule ExteriorRule::callback(int m, Fn value, Fn far, std::string name) {
  if (!value) throw DomainError("callback exterior rule needs a value function");
  ExteriorRule r;
  r.kind_ = Kind::callback;
  r.m_ = m;
  r.name_ = std::move(name);
  r.value_ = std::move(value);
  r.far_ = std::move(far);
  return r;
}

void ExteriorRule::evaluate(std::span<const double> x, std::span<double> out) const {
  switch (kind_) {
    case Kind::zero:
    case Kind::constant:
      std::copy(constant_.begin(), constant_.end(), out.begin());
      return;
    case Kind::periodic:
      throw DomainError("periodic field has no exterior data");
    default:
      value_(x, out);
  }
}

void ExteriorRule::far_field(std::span<const double> dir, std::span<double> out) const {
  if (constant_valued()) {
    std::copy(constant_.begin(), constant_.end(), out.begin());
    return;
  }
  if (!far_) throw DomainError("exterior rule '" + name_ + "' has no far-field limit");
  far_(dir, out);
}

ExteriorRule ExteriorRule::scaled(double mu, double t) const {
  if (!(t > 0.0)) throw DomainError("scaling needs t > 0");
  if (kind_ == Kind::periodic) return *this;
  if (constant_valued()) {
    std::vector<double> v = constant_;
    for (double& x : v) x *= mu;
    ExteriorRule r = kind_ == Kind::zero ? zero(m_) : constant(std::move(v));
    return r;
  }
  const ExteriorRule base = *this;
  const int m = m_;
  Fn value = [base, mu, t](std::span<const double> x, std::span<double> out) {
    std::array<double, 3> tx{};
    for (std::size_t i = 0; i < x.size(); ++i) tx[i] = t * x[i];
    base.evaluate(std::span<const double>(tx.data(), x.size()), out);
    for (double& v : out) v *= mu;
  };
  Fn far;
  if (far_) {
    far = [base, mu](std::span<const double> dir, std::span<double> out) {
      base.far_field(dir, out);
      for (double& v : out) v *= mu;
    };
  }
  return callback(m, std::move(value), std::move(far), name_);
}

ExteriorRule ExteriorRule::squared() const {
  if (kind_ == Kind::periodic) return *this;
  if (constant_valued()) {
    std::vector<double> v = constant_;
    for (double& x : v) x *= x;
    return kind_ == Kind::zero ? zero(m_) : constant(std::move(v));
  }
  const ExteriorRule base = *this;
  Fn value = [base](std::span<const double> x, std::span<double> out) {
    base.evaluate(x, out);
    for (double& v : out) v *= v;
  };
  Fn far;
  if (far_) {
    far = [base](std::span<const double> dir, std::span<double> out) {
      base.far_field(dir, out);
      for (double& v : out) v *= v;
    };
  }
  return callback(m_, std::move(value), std::move(far), name_ + "^2");
}

ExteriorRule ExteriorRule::component(int c) const {
  if (c < 0 || c >= m_) throw DomainError("exterior rule component out of range");
  if (kind_ == Kind::periodic) return periodic(1);
  if (constant_valued()) return kind_ == Kind::zero ? zero(1) : constant({constant_[c]});
  const ExteriorRule base = *this;
  const int m = m_;
  Fn value = [base, c, m](std::span<const double> x, std::span<double> out) {
    std::array<double, 8> buf{};
    std::vector<double> big;
    std::span<double> all(buf.data(), m);
    if (m > 8) big.resize(m), all = big;
    base.evaluate(x, all);
    out[0] = all[c];
  };
  Fn far;
  if (far_) {
    far = [base, c, m](std::span<const double> dir, std::span<double> out) {
      std::vector<double> all(m);
      base.far_field(dir, all);
      out[0] = all[c];
    };
  }
  return callback(1, std::move(value), std::move(far), name_ + "[" + std::to_string(c) + "]");
}

// ---------------------------------------------------------------- SampledField

SampledField::SampledField(GridSpec grid, int m, std::vector<double> values, ExteriorRule exterior)
    : SampledField(std::make_shared<const Lattice>(grid), m, std::move(values), std::move(exterior)) {}

SampledField::SampledField(std::shared_ptr<const Lattice> lattice, int m, std::vector<double> values,
                           ExteriorRule exterior)
    : lattice_(std::move(lattice)), m_(m), values_(std::move(values)), exterior_(std::move(exterior)) {
  if (m_ < 1) throw DomainError("field needs at least one component");
  if (values_.size() != static_cast<std::size_t>(m_) * lattice_->size())
    throw DomainError("field value count does not match the grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("field values must be finite");
  if (exterior_.components() != m_) throw DomainError("exterior rule has the wrong number of components");
  if (lattice_->grid().periodic != (exterior_.kind() == ExteriorRule::Kind::periodic))
    throw DomainError("periodic grids need the periodic exterior rule and vice versa");
}

SampledField SampledField::from_function(const GridSpec& grid, int m, const PointFn& fn, ExteriorRule exterior) {
  return from_function(std::make_shared<const Lattice>(grid), m, fn, std::move(exterior));
}

SampledField SampledField::from_function(std::shared_ptr<const Lattice> lattice, int m, const PointFn& fn,
                                         ExteriorRule exterior) {
  const std::size_t n = lattice->size();
  std::vector<double> values(static_cast<std::size_t>(m) * n);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = lattice->position(i);
    fn(std::span<const double>(x.data(), lattice->dim()), out);
    for (int c = 0; c < m; ++c) values[c * n + i] = out[c];
  }
  return SampledField(std::move(lattice), m, std::move(values), std::move(exterior));
}

std::span<const double> SampledField::component(int c) const {
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(c) * size(), size());
}

std::vector<double> SampledField::value_at(std::size_t node) const {
  std::vector<double> v(m_);
  for (int c = 0; c < m_; ++c) v[c] = value(c, node);
  return v;
}

double SampledField::node_value(int c, NodeIndex idx) const {
  if (auto node = lattice_->find(idx)) return value(c, *node);
  const double h = grid().h;
  const std::array<double, 2> x{idx[0] * h, idx[1] * h};
  std::vector<double> out(m_);
  exterior_.evaluate(std::span<const double>(x.data(), grid().dim), out);
  return out[c];
}

std::vector<double> SampledField::sample(std::span<const double> x) const {
  const double h = grid().h;
  const int dim = grid().dim;
  std::array<int, 2> base{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const double q = x[a] / h;
    double f = std::floor(q);
    // Snap onto a node when rounding leaves q a hair below an integer.
    if (q - f > 1.0 - 1e-12) f += 1.0;
    base[a] = static_cast<int>(f);
    frac[a] = std::max(0.0, q - f);
  }
  std::vector<double> out(m_, 0.0);
  const int corners = dim == 2 ? 4 : 2;
  for (int corner = 0; corner < corners; ++corner) {
    const int d0 = corner & 1, d1 = (corner >> 1) & 1;
    double w = d0 ? frac[0] : 1.0 - frac[0];
    if (dim == 2) w *= d1 ? frac[1] : 1.0 - frac[1];
    if (w == 0.0) continue;
    const NodeIndex idx{base[0] + d0, dim == 2 ? base[1] + d1 : 0};
    for (int c = 0; c < m_; ++c) out[c] += w * node_value(c, idx);
  }
  return out;
}

SampledField SampledField::with_bound(double M) const {
  if (!(M > 0.0)) throw DomainError("bound M must be positive");
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int c = 0; c < m_; ++c) r2 += value(c, i) * value(c, i);
    if (std::sqrt(r2) > M * (1.0 + 1e-12))
      throw DomainError("pointwise bound |u| <= M violated at node " + std::to_string(i));
  }
  SampledField out = *this;
  out.bound_ = M;
  return out;
}

// ---------------------------------------------------------------- ball statistics

namespace {

struct BallNodes {
  std::vector<NodeIndex> idx;
  std::vector<double> weight;  // cell measure inside the ball
  std::vector<char> in_ball;   // node itself inside the closed ball
};

double cell_fraction_2d(double x0, double x1, double h, const Ball& ball) {
  const double c0 = ball.center[0], c1 = ball.center[1], r = ball.radius;
  // Distance from the center to the nearest and farthest points of the cell.
  const double lo0 = x0 - 0.5 * h, hi0 = x0 + 0.5 * h, lo1 = x1 - 0.5 * h, hi1 = x1 + 0.5 * h;
  const double n0 = std::clamp(c0, lo0, hi0) - c0, n1 = std::clamp(c1, lo1, hi1) - c1;
  if (n0 * n0 + n1 * n1 >= r * r) return 0.0;
  const double f0 = std::max(std::abs(lo0 - c0), std::abs(hi0 - c0));
  const double f1 = std::max(std::abs(lo1 - c1), std::abs(hi1 - c1));
  if (f0 * f0 + f1 * f1 <= r * r) return h * h;
  constexpr int kSub = 8;
  int hits = 0;
  for (int i = 0; i < kSub; ++i)
    for (int j = 0; j < kSub; ++j) {
      const double y0 = lo0 + (i + 0.5) * h / kSub - c0;
      const double y1 = lo1 + (j + 0.5) * h / kSub - c1;
      if (y0 * y0 + y1 * y1 <= r * r) ++hits;
    }
  return h * h * hits / (kSub * kSub);
}

BallNodes collect(const SampledField& u, const Ball& ball) {
  const GridSpec& g = u.grid();
  if (static_cast<int>(ball.center.size()) != g.dim) throw DomainError("ball center has the wrong dimension");
  if (!(ball.radius > 0.0)) throw DomainError("ball radius must be positive");
  const double h = g.h;
  std::array<int, 2> lo{0, 0}, hi{0, 0};
  for (int a = 0; a < g.dim; ++a) {
    lo[a] = static_cast<int>(std::floor((ball.center[a] - ball.radius) / h)) - 1;
    hi[a] = static_cast<int>(std::ceil((ball.center[a] + ball.radius) / h)) + 1;
  }
  BallNodes out;
  bool any = false;
  for (int j = lo[1]; j <= hi[1]; ++j)
    for (int i = lo[0]; i <= hi[0]; ++i) {
      const double x0 = i * h, x1 = j * h;
      double w = 0.0;
      bool inside = false;
      if (g.dim == 1) {
        const double a = std::max(x0 - 0.5 * h, ball.center[0] - ball.radius);
        const double b = std::min(x0 + 0.5 * h, ball.center[0] + ball.radius);
        w = std::max(0.0, b - a);
        inside = std::abs(x0 - ball.center[0]) <= ball.radius;
      } else {
        w = cell_fraction_2d(x0, x1, h, ball);
        const double d0 = x0 - ball.center[0], d1 = x1 - ball.center[1];
        inside = d0 * d0 + d1 * d1 <= ball.radius * ball.radius;
      }
      if (w <= 0.0 && !inside) continue;
      any = any || inside;
      out.idx.push_back({i, j});
      out.weight.push_back(w);
      out.in_ball.push_back(inside ? 1 : 0);
    }
  if (!any) throw DomainError("ball contains no grid nodes");
  return out;
}

}  // namespace

std::vector<std::size_t> nodes_in_ball(const Lattice& lattice, const Ball& ball) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    double d2 = 0.0;
    for (int a = 0; a < lattice.dim(); ++a) {
      const double t = lattice.coord(i, a) - ball.center[a];
      d2 += t * t;
    }
    if (d2 <= ball.radius * ball.radius) out.push_back(i);
  }
  return out;
}

std::vector<double> field_average(const SampledField& u, const Ball& ball) {
  const BallNodes nodes = collect(u, ball);
  const int m = u.components();
  std::vector<double> mean(m, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < nodes.idx.size(); ++k) {
    if (nodes.weight[k] == 0.0) continue;
    total += nodes.weight[k];
    for (int c = 0; c < m; ++c) mean[c] += nodes.weight[k] * u.node_value(c, nodes.idx[k]);
  }
  for (double& v : mean) v /= total;
  return mean;
}

std::vector<double> image_points(const SampledField& u, const Ball& ball) {
  const BallNodes nodes = collect(u, ball);
  std::vector<double> pts;
  for (std::size_t k = 0; k < nodes.idx.size(); ++k) {
    if (!nodes.in_ball[k]) continue;
    for (int c = 0; c < u.components(); ++c) pts.push_back(u.node_value(c, nodes.idx[k]));
  }
  return pts;
}

BallStat ball_image_stats(const SampledField& u, const Ball& ball) {
  const int m = u.components();
  const std::vector<double> pts = image_points(u, ball);
  BallStat st;
  st.center = ball.center;
  st.radius = ball.radius;
  st.mean = field_average(u, ball);
  st.node_count = pts.size() / m;
  st.osc = point_set_diameter(pts, m);
  const EnclosingBall eb = smallest_enclosing_ball(pts, m);
  st.enclosing_center = eb.center;
  st.enclosing_radius = eb.radius;
  return st;
}

SampledField restrict_rescale(const SampledField& u, double mu, double t) {
  const double R = u.grid().radius;
  return restrict_rescale(u, mu, t, t > 1.0 ? R / t : R);
}

SampledField restrict_rescale(const SampledField& u, double mu, double t, double out_radius) {
  if (!(t > 0.0) || !std::isfinite(mu)) throw DomainError("rescaling needs t > 0 and finite mu");
  const GridSpec& src = u.grid();
  std::optional<double> bound = u.bound();
  if (src.periodic) {
    if (t != 1.0) throw DomainError("periodic fields can only be rescaled with t = 1");
    std::vector<double> v(u.values().begin(), u.values().end());
    for (double& x : v) x *= mu;
    SampledField out(u.lattice_ptr(), u.components(), std::move(v), u.exterior());
    return bound && mu != 0.0 ? out.with_bound(std::abs(mu) * *bound) : out;
  }
  if (!(out_radius > 0.0)) throw DomainError("output radius must be positive");
  if (t * out_radius > 2.0 * src.radius * (1.0 + 1e-12))
    throw DomainError("rescaled extent exceeds the available data (interior plus one-radius collar)");
  GridSpec g = src;
  g.radius = out_radius;
  g.truncation_radius = src.truncation_radius * out_radius / src.radius;
  auto lattice = std::make_shared<const Lattice>(g);
  const int m = u.components();
  const std::size_t n = lattice->size();
  std::vector<double> values(static_cast<std::size_t>(m) * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = lattice->position(i);
    const std::array<double, 2> tx{t * x[0], t * x[1]};
    const auto v = u.sample(std::span<const double>(tx.data(), g.dim));
    for (int c = 0; c < m; ++c) values[c * n + i] = mu * v[c];
  }
  SampledField out(std::move(lattice), m, std::move(values), u.exterior().scaled(mu, t));
  return bound && mu != 0.0 ? out.with_bound(std::abs(mu) * *bound) : out;
}

}  // namespace fracsys
