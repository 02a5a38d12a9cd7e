#include <tessel/weighting.hpp>

#include <cmath>

namespace tessel {

Vector ErrorInterpolant::operator()(const PointSet& x) const {
  if (is_zero()) return Vector::Zero(x.size());
  return gram(kernel_, x, design_) * coefficients_;
}

PointFunction ErrorInterpolant::as_function() const {
  if (is_zero()) return {};
  return [self = *this](const PointSet& x) { return self(x); };
}

ErrorInterpolant error_interpolant(const ConditionedKernel& ck, const Vector& y_m, const Vector& eta_m) {
  check_dims(y_m.size(), ck.size(), "training responses");
  check_dims(eta_m.size(), ck.size(), "training predictions");
  if (!y_m.allFinite() || !eta_m.allFinite()) throw ValidationError("training responses must be finite");
  ErrorInterpolant out;
  if (ck.size() == 0) return out;
  const Vector residual = y_m - eta_m;
  const double range = y_m.maxCoeff() - y_m.minCoeff();
  if (residual.cwiseAbs().maxCoeff() <= 1e-9 * range) return out;
  out.kernel_ = ck.base();
  out.design_ = ck.design();
  out.coefficients_ = ck.solve(residual);
  return out;
}

std::string to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Uniform: return "uniform";
    case WeightScheme::Optimal: return "optimal";
    case WeightScheme::OptimalPrime: return "optimal_prime";
  }
  return "unknown";
}

WeightedTestSet uniform_weights(const PointSet& points) {
  if (points.size() == 0) throw ValidationError("test set is empty");
  return {points, Vector::Constant(points.size(), 1.0 / static_cast<double>(points.size())),
          WeightScheme::Uniform, 0.0, 0.0};
}

namespace {

void check_disjoint(const PointSet& test, const PointSet& design) {
  for (Index i = 0; i < test.size(); ++i) {
    for (Index j = 0; j < design.size(); ++j) {
      if ((test.point(i) - design.point(j)).cwiseAbs().maxCoeff() <= 1e-12) {
        throw OverlapError("test point " + std::to_string(i) + " coincides with training point " +
                           std::to_string(j));
      }
    }
  }
}

WeightScheme scheme_of(const FourthMomentKernel& kb) {
  return kb.kind() == FourthMomentKernel::Kind::Residual ? WeightScheme::Optimal : WeightScheme::OptimalPrime;
}

// Jittered Cholesky solve followed by refinement against the exact matrix.
WeightedTestSet solve_system(const PointSet& test, const Matrix& g, const Vector& p, WeightScheme scheme) {
  const JitteredCholesky chol = factorize_with_jitter(g);
  Vector w = chol.llt.solve(p);
  for (int iter = 0; iter < 3; ++iter) {
    const Vector r = p - g * w;
    if (r.cwiseAbs().maxCoeff() <= 1e-14 * p.cwiseAbs().maxCoeff()) break;
    w += chol.llt.solve(r);
  }
  if (!w.allFinite()) throw ConditioningError("optimal weights are not finite");
  const double scale = p.cwiseAbs().maxCoeff();
  const double residual = (g * w - p).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
  return {test, std::move(w), scheme, residual, chol.jitter};
}

}  // namespace

WeightedTestSet optimal_weights(const FourthMomentKernel& kb, const PointSet& test, const PointSet& mu_sample) {
  if (test.size() == 0) throw ValidationError("test set is empty");
  if (mu_sample.size() == 0) throw ValidationError("optimal weights need a nonempty measure sample");
  check_disjoint(test, kb.conditioned().design());
  return solve_system(test, kb.gram(test), kb.potential(test, mu_sample), scheme_of(kb));
}

WeightedTestSet optimal_weights(const ConditionedKernel& ck, const PointSet& test, const PointSet& mu_sample,
                                const ErrorInterpolant& delta) {
  return optimal_weights(kbar(ck, delta.as_function()), test, mu_sample);
}

WeightedTestSet optimal_weights_prime(const ConditionedKernel& ck, const PointSet& test, const PointSet& mu_sample,
                                      const PointFunction& predictor, double train_mean) {
  return optimal_weights(kbar_prime(ck, predictor, train_mean), test, mu_sample);
}

NestedWeights::NestedWeights(const FourthMomentKernel& kb, const PointSet& test, const PointSet& mu_sample)
    : test_(test), scheme_(scheme_of(kb)) {
  if (mu_sample.size() == 0) throw ValidationError("optimal weights need a nonempty measure sample");
  check_disjoint(test, kb.conditioned().design());
  gram_ = kb.gram(test);
  potential_ = kb.potential(test, mu_sample);
}

WeightedTestSet NestedWeights::leading(Index k) const {
  if (k < 1 || k > size()) throw ValidationError("nested block size out of range");
  return solve_system(test_.head(k), gram_.topLeftCorner(k, k), potential_.head(k), scheme_);
}

double delta_bar_sq(const FourthMomentKernel& kb, const WeightedTestSet& wts, const PointSet& mu_sample,
                    double sigma2) {
  if (!(sigma2 > 0)) throw ValidationError("sigma^2 must be positive");
  check_dims(wts.weights.size(), wts.points.size(), "weights");
  const Vector& w = wts.weights;
  const double value =
      w.dot(kb.gram(wts.points) * w) - 2.0 * w.dot(kb.potential(wts.points, mu_sample)) + kb.energy(mu_sample);
  return sigma2 * value;
}

double delta_bar_sq(const ConditionedKernel& ck, const WeightedTestSet& wts, const PointSet& mu_sample,
                    const ErrorInterpolant& delta, double sigma2) {
  return delta_bar_sq(kbar(ck, delta.as_function()), wts, mu_sample, sigma2);
}

PredictivityReport q2_report(const Vector& y_n, const Vector& eta_n, const WeightedTestSet& wts,
                             const std::optional<Vector>& y_m, const std::optional<WeightedTestSet>& prime_weights) {
  const Index n = y_n.size();
  if (n < 2) throw ValidationError("Q2 needs at least two test observations");
  check_dims(eta_n.size(), n, "test predictions");
  check_dims(wts.weights.size(), n, "test weights");
  if (!y_n.allFinite() || !eta_n.allFinite()) throw ValidationError("test responses must be finite");

  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector sq_res = (y_n - eta_n).array().square();
  const Vector centred = (y_n.array() - y_n.mean()).square();

  PredictivityReport r;
  r.weights = wts;
  r.ise_uniform = inv_n * sq_res.sum();
  r.ise_weighted = wts.weights.dot(sq_res);
  r.denom_uniform = inv_n * centred.sum();
  if (!(r.denom_uniform > 0)) throw DegenerateError("test responses are constant; Q2 is undefined");
  r.q2_hat = 1.0 - r.ise_uniform / r.denom_uniform;
  r.q2_star = wts.scheme == WeightScheme::Uniform ? r.q2_hat : 1.0 - r.ise_weighted / r.denom_uniform;

  if (y_m) {
    if (y_m->size() == 0) throw ValidationError("training responses are empty");
    const Vector around_train = (y_n.array() - y_m->mean()).square();
    const double denom = inv_n * around_train.sum();
    if (!(denom > 0)) throw DegenerateError("test responses equal the training mean; Q2' is undefined");
    r.q2_prime = 1.0 - r.ise_uniform / denom;
    if (prime_weights) {
      check_dims(prime_weights->weights.size(), n, "denominator weights");
      const double weighted = prime_weights->weights.dot(around_train);
      if (!(std::abs(weighted) > 0)) throw DegenerateError("weighted denominator vanishes");
      r.q2_prime_star = 1.0 - r.ise_uniform / weighted;
    }
  } else if (prime_weights) {
    throw ValidationError("denominator weighting needs the training responses");
  }
  return r;
}

}  // namespace tessel
