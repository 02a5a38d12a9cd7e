#pragma once

#include <tessel/kernels.hpp>

#include <optional>

namespace tessel {

/// Hyperparameter search for ordinary kriging. Bounds are per dimension,
/// relative to the coordinate range of the design (1 for a constant column).
struct FitConfig {
  bool optimize = true;
  /// Defaults to half the coordinate range per dimension.
  std::optional<Vector> theta_init;
  int starts = 3;
  int max_evals = 200;
  double lower = 0.05;
  double upper = 5.0;
};

/// Constant-mean GP interpolator with an anisotropic-distance Matern 5/2
/// kernel; the process variance is concentrated out of the likelihood.
class KrigingModel {
 public:
  static KrigingModel fit(const PointSet& x, const Vector& y, const FitConfig& config = {});

  Vector predict(const PointSet& x) const;
  PointFunction predictor() const;

  const Vector& theta() const { return theta_; }
  const KernelSpec& kernel() const { return ck_->base(); }
  const PointSet& design() const { return ck_->design(); }
  const Vector& responses() const { return y_; }
  double beta() const { return beta_; }
  const Vector& dual() const { return dual_; }
  double sigma2() const { return sigma2_; }
  double log_likelihood() const { return log_likelihood_; }
  double initial_log_likelihood() const { return initial_log_likelihood_; }
  double jitter() const { return ck_->jitter(); }
  int evaluations() const { return evaluations_; }

 private:
  KrigingModel() = default;

  std::optional<ConditionedKernel> ck_;
  Vector y_;
  Vector theta_;
  Vector dual_;
  double beta_ = 0.0;
  double sigma2_ = 0.0;
  double log_likelihood_ = 0.0;
  double initial_log_likelihood_ = 0.0;
  int evaluations_ = 0;
};

/// Concentrated log-likelihood of ordinary kriging at lengthscales theta;
/// -infinity when the correlation matrix cannot be factorized.
double concentrated_log_likelihood(const PointSet& x, const Vector& y, const Vector& theta);

/// Leave-one-out Q2 with a complete refit, hyperparameters included, per fold.
double loo_q2(const PointSet& x, const Vector& y, const FitConfig& config = {});

}  // namespace tessel
