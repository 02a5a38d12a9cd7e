#include <tessel/kriging.hpp>
#include <tessel/parallel.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace tessel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct GlsFit {
  double beta = 0.0;
  double sigma2 = 0.0;
  double log_likelihood = kNegInf;
  Vector dual;
};

GlsFit gls(const ConditionedKernel& ck, const Vector& y) {
  const Index m = y.size();
  const Vector ones = Vector::Ones(m);
  const Vector ri_one = ck.solve(ones);
  const Vector ri_y = ck.solve(y);
  GlsFit out;
  out.beta = ri_y.sum() / ri_one.sum();
  out.dual = ri_y - out.beta * ri_one;
  const Vector centred = y.array() - out.beta;
  out.sigma2 = centred.dot(out.dual) / static_cast<double>(m);
  const double md = static_cast<double>(m);
  // A zero variance means y is fitted exactly by the trend; score it by the
  // determinant alone so constant responses stay well defined.
  const double log_s2 = out.sigma2 > 0 ? std::log(out.sigma2) : std::log(std::numeric_limits<double>::min());
  out.log_likelihood = -0.5 * md * log_s2 - 0.5 * ck.log_det() - 0.5 * md * (1.0 + std::log(2.0 * std::numbers::pi));
  return out;
}

Vector coordinate_range(const PointSet& x) {
  Vector r = (x.matrix().colwise().maxCoeff() - x.matrix().colwise().minCoeff()).transpose();
  for (Index i = 0; i < r.size(); ++i) {
    if (!(r(i) > 0)) r(i) = 1.0;
  }
  return r;
}

struct Objective {
  const PointSet& x;
  const Vector& y;
  int evals = 0;

  double operator()(const Vector& log_theta) {
    ++evals;
    return concentrated_log_likelihood(x, y, log_theta.array().exp().matrix());
  }
};

// Compass search in log-lengthscale space, maximizing; returns the best point.
Vector compass_search(Objective& f, Vector start, const Vector& lo, const Vector& hi, int budget, double& best) {
  Vector cur = start.cwiseMax(lo).cwiseMin(hi);
  best = f(cur);
  int used = 1;
  double step = 0.5 * (hi - lo).maxCoeff() / 2.0;
  while (step > 1e-3 && used < budget) {
    bool improved = false;
    for (Index i = 0; i < cur.size() && used < budget; ++i) {
      for (double sign : {1.0, -1.0}) {
        if (used >= budget) break;
        Vector trial = cur;
        trial(i) = std::clamp(cur(i) + sign * step, lo(i), hi(i));
        if (trial(i) == cur(i)) continue;
        const double v = f(trial);
        ++used;
        if (v > best) {
          best = v;
          cur = trial;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return cur;
}

}  // namespace

double concentrated_log_likelihood(const PointSet& x, const Vector& y, const Vector& theta) {
  try {
    const ConditionedKernel ck(KernelSpec::matern52_anisotropic(theta), x);
    const double ll = gls(ck, y).log_likelihood;
    return std::isfinite(ll) ? ll : kNegInf;
  } catch (const NumericalError&) {
    return kNegInf;
  }
}

KrigingModel KrigingModel::fit(const PointSet& x, const Vector& y, const FitConfig& config) {
  const Index m = x.size();
  if (m < 2) throw ValidationError("kriging needs at least two training points");
  check_dims(y.size(), m, "training responses");
  if (!y.allFinite()) throw ValidationError("training responses must be finite");
  if (config.starts < 1 || config.max_evals < 1) throw ValidationError("fit needs at least one start and evaluation");
  if (!(config.lower > 0) || !(config.upper > config.lower)) throw ValidationError("invalid lengthscale bounds");

  const Vector range = coordinate_range(x);
  Vector theta0 = config.theta_init ? *config.theta_init : Vector(0.5 * range);
  check_dims(theta0.size(), x.dim(), "initial lengthscales");

  KrigingModel model;
  model.y_ = y;
  model.initial_log_likelihood_ = concentrated_log_likelihood(x, y, theta0);
  model.evaluations_ = 1;
  Vector theta = theta0;

  if (config.optimize) {
    const Vector lo = (config.lower * range).array().log();
    const Vector hi = (config.upper * range).array().log();
    std::vector<Vector> starts{Vector(theta0.array().log())};
    starts.push_back(0.5 * (lo + hi));
    starts.push_back(lo + 0.25 * (hi - lo));
    for (int k = 3; k < config.starts; ++k) {
      starts.push_back(lo + (static_cast<double>(k) / config.starts) * (hi - lo));
    }
    starts.resize(static_cast<std::size_t>(config.starts));

    Objective f{x, y};
    double best = model.initial_log_likelihood_;
    for (const Vector& s : starts) {
      double value = kNegInf;
      const Vector found = compass_search(f, s, lo, hi, config.max_evals, value);
      if (value > best) {
        best = value;
        theta = found.array().exp();
      }
    }
    model.evaluations_ += f.evals;
  }

  model.theta_ = theta;
  model.ck_.emplace(KernelSpec::matern52_anisotropic(theta), x);
  const GlsFit g = gls(*model.ck_, y);
  model.beta_ = g.beta;
  model.dual_ = g.dual;
  model.sigma2_ = g.sigma2;
  model.log_likelihood_ = g.log_likelihood;
  return model;
}

Vector KrigingModel::predict(const PointSet& x) const {
  check_dims(x.dim(), design().dim(), "predict");
  Vector out = gram(kernel(), x, design()) * dual_;
  out.array() += beta_;
  return out;
}

PointFunction KrigingModel::predictor() const {
  return [self = *this](const PointSet& x) { return self.predict(x); };
}

double loo_q2(const PointSet& x, const Vector& y, const FitConfig& config) {
  const Index m = x.size();
  if (m < 3) throw ValidationError("leave-one-out needs at least three training points");
  check_dims(y.size(), m, "training responses");
  const double denom = (y.array() - y.mean()).square().sum();
  if (!(denom > 0)) throw DegenerateError("training responses are constant; LOO Q2 is undefined");

  Vector pred(m);
  parallel_for(m, [&](Index i) {
    std::vector<Index> keep;
    for (Index j = 0; j < m; ++j) {
      if (j != i) keep.push_back(j);
    }
    Vector yk(m - 1);
    for (Index j = 0; j < m - 1; ++j) yk(j) = y(keep[static_cast<std::size_t>(j)]);
    const KrigingModel fold = KrigingModel::fit(x.subset(keep), yk, config);
    const Index held[] = {i};
    pred(i) = fold.predict(x.subset(held))(0);
  }, 1);
  return 1.0 - (y - pred).squaredNorm() / denom;
}

}  // namespace tessel
