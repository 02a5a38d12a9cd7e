#pragma once

#include <tessel/core.hpp>
#include <tessel/rng.hpp>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tessel {

/// Ordered n x d set of points, one point per row. Coordinates are finite.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(Index dim) : points_(0, dim) {}
  explicit PointSet(Matrix points);

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  bool empty() const { return points_.rows() == 0; }

  const Matrix& matrix() const { return points_; }
  auto point(Index i) const { return points_.row(i); }

  PointSet subset(std::span<const Index> rows) const;
  PointSet head(Index n) const { return PointSet(Matrix(points_.topRows(n))); }

  /// Rows of `a` followed by rows of `b`.
  static PointSet concat(const PointSet& a, const PointSet& b);

  bool operator==(const PointSet& other) const {
    return points_.rows() == other.points_.rows() && points_.cols() == other.points_.cols() &&
           points_ == other.points_;
  }

 private:
  Matrix points_;
};

struct UniformMarginal {
  double lower = 0.0;
  double upper = 1.0;
};

struct NormalMarginal {
  double mean = 0.0;
  double sd = 1.0;
};

/// exp(N(mu, sigma)).
struct LogNormalMarginal {
  double mu = 0.0;
  double sigma = 1.0;
};

using Marginal = std::variant<UniformMarginal, NormalMarginal, LogNormalMarginal>;

double quantile(const Marginal& m, double u);
double cdf(const Marginal& m, double x);
std::string describe(const Marginal& m);

/// The measure mu against which predictivity is integrated.
class TargetMeasure {
 public:
  struct UnitCube {
    Index dim = 0;
  };
  struct Product {
    std::vector<Marginal> marginals;
  };
  struct Empirical {
    PointSet atoms;
    Vector weights;  // empty means uniform
  };

  /// Zero-dimensional placeholder; only assignable.
  TargetMeasure();

  static TargetMeasure unit_cube(Index dim);
  static TargetMeasure product(std::vector<Marginal> marginals);
  static TargetMeasure standard_normal(Index dim);
  static TargetMeasure empirical(PointSet atoms, Vector weights = {});

  /// Parses `uniform:d=2`, `normal:d=3` or `product:U(0,1),N(0,1),LN(0,0.5)`.
  static TargetMeasure parse(const std::string& text);

  Index dim() const;
  std::string describe() const;

  bool is_unit_cube() const { return std::holds_alternative<UnitCube>(kind_); }
  bool is_product() const { return std::holds_alternative<Product>(kind_); }
  bool is_empirical() const { return std::holds_alternative<Empirical>(kind_); }

  /// Marginals of a unit-cube or product measure (unit cube expands to U(0,1)).
  std::vector<Marginal> marginals() const;
  const Empirical& empirical_part() const { return std::get<Empirical>(kind_); }

  /// Independent Monte-Carlo sample of size n.
  PointSet sample(Index n, Rng& rng) const;

 private:
  std::variant<UnitCube, Product, Empirical> kind_;
};

/// Unscrambled Sobol points (Joe-Kuo direction numbers), indices skip..skip+n-1.
/// Point 0 is the origin.
PointSet sobol_sequence(Index dim, Index n, std::uint64_t skip = 0);

inline constexpr Index kMaxSobolDimension = 100;

/// The 2^d vertices of the unit cube, vertex k having coordinate j equal to bit j of k.
PointSet cube_vertices(Index dim);

/// 1000 d + 2 n_target Sobol points, optionally followed by the 2^d cube
/// vertices. The Sobol part starts at index 1 so the origin appears once.
PointSet candidate_set(Index dim, Index n_target, bool include_vertices);

/// Coordinatewise inverse-CDF map from [0,1]^d onto a product measure.
PointSet iso_transform(const PointSet& u, const TargetMeasure& mu);

/// Coordinatewise CDF map onto [0,1]^d; inverse of iso_transform.
PointSet iso_transform_inverse(const PointSet& x, const TargetMeasure& mu);

/// Random Latin hypercube: one point per stratum [k/m, (k+1)/m) in every coordinate.
PointSet latin_hypercube(Index dim, Index m, Rng& rng);

/// latin_hypercube(dim, m, Rng(seed)) improved by 10 m^2 pairwise coordinate-exchange proposals,
/// each accepted when the minimum interpoint distance does not decrease.
PointSet maximin_lhs(Index dim, Index m, std::uint64_t seed);

double min_pairwise_distance(const PointSet& x);

/// True when every point lies in [0,1]^d.
bool in_unit_cube(const PointSet& x);

}  // namespace tessel
