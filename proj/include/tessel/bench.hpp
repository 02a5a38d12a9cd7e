#pragma once

#include <tessel/kriging.hpp>
#include <tessel/selection.hpp>
#include <tessel/weighting.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace tessel {

/// h(2 x1 - 1, 2 x2 - 1) on [0,1]^2.
template <typename Derived>
double f1(const Eigen::MatrixBase<Derived>& x) {
  check_dims(x.size(), 2, "f1");
  const double u1 = 2.0 * x(0) - 1.0;
  const double u2 = 2.0 * x(1) - 1.0;
  const double u1s = u1 * u1;
  const double u2s = u2 * u2;
  return std::exp(u1) / 5.0 - u2 / 5.0 + u2s * u2s * u2s / 3.0 + 4.0 * u2s * u2s - 4.0 * u2s +
         7.0 * u1s / 10.0 + u1s * u1s + 3.0 / (4.0 * u1s + 4.0 * u2s + 1.0);
}

/// Defined on all of R^2.
template <typename Derived>
double f2(const Eigen::MatrixBase<Derived>& x) {
  check_dims(x.size(), 2, "f2");
  const double a = 5.0 + 1.5 * x(0);
  const double b = 5.0 + 1.5 * x(1);
  return std::cos(a) + std::sin(a) + a * b / 100.0;
}

/// prod_i (|4 x_i - 2| + i^2) / (1 + i^2), any dimension.
template <typename Derived>
double gsobol(const Eigen::MatrixBase<Derived>& x) {
  double v = 1.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double a = static_cast<double>((i + 1) * (i + 1));
    v *= (std::abs(4.0 * x(i) - 2.0) + a) / (1.0 + a);
  }
  return v;
}

enum class CaseId { F1, F2, GSobol };

std::string to_string(CaseId id);
CaseId parse_case(const std::string& text);

using TestFunction = std::function<Vector(const PointSet&)>;

TestFunction test_function(CaseId id);

struct TestCase {
  CaseId id = CaseId::F1;
  Index dim = 2;
  TargetMeasure mu;
  std::vector<Index> m_grid;
  Index n_min = 4;
  Index n_max = 50;
  double herding_theta = 0.2;
  Index n_candidates = Index{1} << 14;
  bool vertices = true;

  static TestCase preset(CaseId id);
};

/// 1 - sum (f - eta)^2 / sum (f - mean f)^2 over an M-point sample of mu.
double q2_mc(const TestFunction& f, const PointFunction& model, const TargetMeasure& mu, Index sample_size,
             std::uint64_t seed);

struct BenchRow {
  std::string method;
  Index m = 0;
  Index n = 0;
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<std::string> warnings;

  /// First value matching (method, m, n, metric); throws when absent.
  double value(const std::string& method, Index m, Index n, const std::string& metric) const;
};

struct Section4Config {
  std::vector<Method> methods{Method::Fssf, Method::SupportPoints, Method::Herding};
  /// Training sizes; the preset grid when empty.
  std::vector<Index> m_values;
  Index mc_size = 100000;
  bool loo = true;
  /// Overrides the preset candidate count when positive.
  Index n_candidates = 0;
  FitConfig fit;
};

/// Per m: maximin LHS (transformed for non-uniform mu), kriging fit, Q2_MC and
/// LOO baselines; per method a nested test set of n_max points and, for every
/// n in the preset range, q2_hat, q2_star and the optimal weight sum.
BenchResult run_section4(const TestCase& tc, const Section4Config& config, std::uint64_t seed);

struct Dataset {
  PointSet inputs;
  Vector responses;
};

/// N points of an 8-dimensional product of alternating N(0,1) and LN(0,0.5)
/// marginals, with gsobol responses of the CDF-transformed inputs.
Dataset synthetic_split_dataset(Index n_points, std::uint64_t seed);

struct SplitConfig {
  std::vector<double> ratios;  // 0.1, 0.15, ..., 0.9 when empty
  Index repetitions = 200;
  std::vector<Method> methods{Method::Herding, Method::SupportPoints};
  FitConfig fit;
};

/// Dataset splitting study on min-max normalized inputs. Kriging lengthscales
/// are estimated once on the full dataset and frozen for every split.
BenchResult run_split_study(const Dataset& data, const SplitConfig& config, std::uint64_t seed);

/// Type-7 sample quantile.
double sample_quantile(std::vector<double> values, double p);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Columns rescaled to [0,1] (constant columns map to 0.5).
PointSet minmax_normalize(const PointSet& x);

}  // namespace tessel
