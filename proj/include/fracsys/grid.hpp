#pragma once

// Uniform Cartesian sampling of vector fields u: R^n -> R^m (n = 1 or 2).
//
// Two layouts are supported:
//  * ball:     nodes j h with |j h| < radius are the interior (the domain Omega);
//              everything else is given by an ExteriorRule evaluated on demand.
//  * periodic: an N^n torus of period N h; every node is interior.

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fracsys {

struct GridSpec {
  int dim = 1;
  double h = 0.0;
  /// Radius of the interior ball (ball layout) or half the period (periodic).
  double radius = 1.0;
  /// Offsets |y| beyond this are handled by a far-field tail integral.
  double truncation_radius = 4.0;
  bool periodic = false;
  /// Nodes per axis for the periodic layout.
  int nodes_per_axis = 0;

  /// Ball B_radius(0) with `nodes_across` cells along a diameter (h = 2 radius / nodes_across).
  static GridSpec ball(int dim, double radius, int nodes_across, double truncation_factor = 4.0);
  /// Torus [0, period)^dim sampled with `nodes` points per axis; the truncation box
  /// spans `periods` whole periods on each side.
  static GridSpec periodic_box(int dim, int nodes, double period, int periods = 8);

  double period() const { return nodes_per_axis * h; }
  /// Throws DomainError unless h > 0, radius > 0 and truncation_radius >= 4 radius.
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

using NodeIndex = std::array<int, 2>;

/// Interior nodes of a grid, stored row by row so that each grid row is a
/// contiguous run in every field array.
class Lattice {
 public:
  struct Run {
    int row = 0;     ///< second index (0 in 1D)
    int begin = 0;   ///< first index of the run
    int end = 0;     ///< one past the last first-index
    std::size_t offset = 0;
  };

  explicit Lattice(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  std::size_t size() const { return index_.size(); }
  NodeIndex index(std::size_t node) const { return index_[node]; }
  double coord(std::size_t node, int axis) const { return index_[node][axis] * grid_.h; }
  std::array<double, 2> position(std::size_t node) const;
  std::span<const Run> runs() const { return runs_; }
  /// Interior node with the given integer coordinates (wrapped when periodic).
  std::optional<std::size_t> find(NodeIndex idx) const;
  bool interior(NodeIndex idx) const { return find(idx).has_value(); }
  /// Interior node closest to x.
  std::size_t nearest(std::span<const double> x) const;

 private:
  GridSpec grid_;
  std::vector<NodeIndex> index_;
  std::vector<Run> runs_;
  int row_min_ = 0;
  std::vector<int> run_of_row_;  ///< run id per row (ball layout), -1 if empty
};

/// Complement data g of a nonlocal Dirichlet problem: the values of u outside Omega.
class ExteriorRule {
 public:
  enum class Kind { zero, constant, sign, radial_projection, twist, callback, periodic };
  using Fn = std::function<void(std::span<const double> x, std::span<double> out)>;

  static ExteriorRule zero(int m = 1);
  static ExteriorRule constant(std::vector<double> value);
  /// sign(x_1); m = 1.
  static ExteriorRule sign();
  /// x / |x|; m = n.
  static ExteriorRule radial_projection(int n);
  /// (cos(beta tanh x_1), sin(beta tanh x_1)); m = 2, unit modulus everywhere.
  static ExteriorRule twist(double beta);
  /// Marks a periodic field; there is no exterior.
  static ExteriorRule periodic(int m = 1);
  /// Arbitrary data; `far` gives the limit of g(r theta) as r -> infinity.
  static ExteriorRule callback(int m, Fn value, Fn far, std::string name);

  Kind kind() const { return kind_; }
  int components() const { return m_; }
  const std::string& name() const { return name_; }
  bool constant_valued() const { return kind_ == Kind::zero || kind_ == Kind::constant; }
  bool has_far_field() const { return static_cast<bool>(far_); }
  const std::vector<double>& constant_value() const { return constant_; }

  void evaluate(std::span<const double> x, std::span<double> out) const;
  /// Limit value along the direction `dir` (unit vector).
  void far_field(std::span<const double> dir, std::span<double> out) const;

  /// x -> mu g(t x).
  ExteriorRule scaled(double mu, double t) const;
  /// Componentwise square of the data.
  ExteriorRule squared() const;
  /// Restriction to a single component.
  ExteriorRule component(int c) const;

 private:
  Kind kind_ = Kind::zero;
  int m_ = 1;
  std::string name_ = "zero";
  std::vector<double> constant_;
  Fn value_;
  Fn far_;
};

/// A vector field sampled at the interior nodes (component-major storage) plus
/// the rule that defines it elsewhere.
class SampledField {
 public:
  SampledField(GridSpec grid, int m, std::vector<double> values, ExteriorRule exterior);
  SampledField(std::shared_ptr<const Lattice> lattice, int m, std::vector<double> values,
               ExteriorRule exterior);

  using PointFn = std::function<void(std::span<const double> x, std::span<double> out)>;
  static SampledField from_function(const GridSpec& grid, int m, const PointFn& fn, ExteriorRule exterior);
  static SampledField from_function(std::shared_ptr<const Lattice> lattice, int m, const PointFn& fn,
                                    ExteriorRule exterior);

  const GridSpec& grid() const { return lattice_->grid(); }
  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }
  int components() const { return m_; }
  std::size_t size() const { return lattice_->size(); }
  const ExteriorRule& exterior() const { return exterior_; }

  std::span<const double> component(int c) const;
  std::span<const double> values() const { return values_; }
  double value(int c, std::size_t node) const { return values_[c * size() + node]; }
  std::vector<double> value_at(std::size_t node) const;
  /// Value at any lattice point: stored inside, exterior rule outside, wrapped if periodic.
  double node_value(int c, NodeIndex idx) const;
  /// Multilinear interpolation of node values at an arbitrary point.
  std::vector<double> sample(std::span<const double> x) const;

  std::optional<double> bound() const { return bound_; }
  /// Attaches the pointwise bound |u| <= M (checked at every node).
  SampledField with_bound(double M) const;

 private:
  std::shared_ptr<const Lattice> lattice_;
  int m_ = 1;
  std::vector<double> values_;
  ExteriorRule exterior_;
  std::optional<double> bound_;
};

struct Ball {
  std::vector<double> center;
  double radius = 1.0;
};

struct BallStat {
  std::vector<double> center;
  double radius = 0.0;
  std::vector<double> mean;
  /// Diameter of the image set {u(x) : x in ball}.
  double osc = 0.0;
  std::vector<double> enclosing_center;
  double enclosing_radius = 0.0;
  std::size_t node_count = 0;
};

/// Interior nodes with |x - center| <= radius.
std::vector<std::size_t> nodes_in_ball(const Lattice& lattice, const Ball& ball);

/// Volume-weighted mean over the ball: every node carries the measure of its grid
/// cell inside the ball.
std::vector<double> field_average(const SampledField& u, const Ball& ball);

/// Values u(x) at the lattice points x of the closed ball (interior or exterior),
/// m per point.
std::vector<double> image_points(const SampledField& u, const Ball& ball);

BallStat ball_image_stats(const SampledField& u, const Ball& ball);

/// x -> mu u(t x), resampled by multilinear interpolation. The result lives on a
/// ball of radius min(R, R/t) with the same spacing, so every sample lies inside
/// the source domain or its exterior collar; any attached bound becomes mu M.
SampledField restrict_rescale(const SampledField& u, double mu, double t);
/// Same with an explicit output radius; fails if t * radius exceeds the source
/// data extent (interior ball plus a collar of one radius).
SampledField restrict_rescale(const SampledField& u, double mu, double t, double out_radius);

}  // namespace fracsys
