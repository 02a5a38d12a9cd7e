#pragma once

#include <tessel/kernels.hpp>

#include <optional>
#include <string>

namespace tessel {

/// Kriging interpolator of the training residuals,
///   delta(x) = k_m(x)^T K_m^{-1} (y_m - eta_m).
/// Identically zero when the predictor interpolates the training data.
class ErrorInterpolant {
 public:
  ErrorInterpolant() = default;

  bool is_zero() const { return coefficients_.size() == 0; }
  const Vector& coefficients() const { return coefficients_; }

  Vector operator()(const PointSet& x) const;

  /// Empty function when zero, so kbar reduces exactly to the interpolating case.
  PointFunction as_function() const;

 private:
  friend ErrorInterpolant error_interpolant(const ConditionedKernel&, const Vector&, const Vector&);

  KernelSpec kernel_;
  PointSet design_;
  Vector coefficients_;
};

/// Zero when max |y_m - eta_m| <= 1e-9 range(y_m).
ErrorInterpolant error_interpolant(const ConditionedKernel& ck, const Vector& y_m, const Vector& eta_m);

enum class WeightScheme { Uniform, Optimal, OptimalPrime };

std::string to_string(WeightScheme scheme);

struct WeightedTestSet {
  PointSet points;
  Vector weights;
  WeightScheme scheme = WeightScheme::Uniform;
  /// |K-bar w - p|_inf / |p|_inf; zero for uniform weights.
  double residual = 0.0;
  double jitter = 0.0;
};

WeightedTestSet uniform_weights(const PointSet& points);

/// Solves K-bar(X_n) w = p(X_n), with p the K-bar potential of the empirical
/// measure on `mu_sample`. Rejects test points within 1e-12 of the training design.
WeightedTestSet optimal_weights(const FourthMomentKernel& kb, const PointSet& test, const PointSet& mu_sample);

WeightedTestSet optimal_weights(const ConditionedKernel& ck, const PointSet& test, const PointSet& mu_sample,
                                const ErrorInterpolant& delta = {});

/// Weights for the denominator of the alternative estimator, from K-bar'.
WeightedTestSet optimal_weights_prime(const ConditionedKernel& ck, const PointSet& test, const PointSet& mu_sample,
                                      const PointFunction& predictor, double train_mean);

/// Optimal weights for every leading block X_n[0:k] of a nested test set,
/// sharing one K-bar assembly and potential evaluation.
class NestedWeights {
 public:
  NestedWeights(const FourthMomentKernel& kb, const PointSet& test, const PointSet& mu_sample);

  Index size() const { return test_.size(); }
  WeightedTestSet leading(Index k) const;

  const Matrix& gram() const { return gram_; }
  const Vector& potential() const { return potential_; }

 private:
  PointSet test_;
  Matrix gram_;
  Vector potential_;
  WeightScheme scheme_;
};

/// sigma^2 d^2_{K-bar}(zeta, mu_sample): the predicted mean-squared error of
/// the weighted ISE estimate.
double delta_bar_sq(const FourthMomentKernel& kb, const WeightedTestSet& wts, const PointSet& mu_sample,
                    double sigma2 = 1.0);
double delta_bar_sq(const ConditionedKernel& ck, const WeightedTestSet& wts, const PointSet& mu_sample,
                    const ErrorInterpolant& delta, double sigma2 = 1.0);

struct PredictivityReport {
  double q2_hat = 0.0;
  double q2_star = 0.0;
  std::optional<double> q2_prime;
  std::optional<double> q2_prime_star;
  /// (1/n) sum (y - eta)^2.
  double ise_uniform = 0.0;
  /// sum w_i (y - eta)^2.
  double ise_weighted = 0.0;
  /// (1/n) sum (y - mean(y_n))^2.
  double denom_uniform = 0.0;
  WeightedTestSet weights;
};

/// Q2 estimators on a test sample. `y_m` enables the alternative estimator
/// with the training mean; `prime_weights` additionally weights its denominator.
/// The weighted numerator is divided by the unweighted (1/n) denominator.
PredictivityReport q2_report(const Vector& y_n, const Vector& eta_n, const WeightedTestSet& wts,
                             const std::optional<Vector>& y_m = std::nullopt,
                             const std::optional<WeightedTestSet>& prime_weights = std::nullopt);

}  // namespace tessel
