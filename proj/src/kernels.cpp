#include <tessel/kernels.hpp>
#include <tessel/parallel.hpp>

#include <algorithm>
#include <cmath>

namespace tessel {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Matern12: return "matern12";
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Matern52: return "matern52";
    case KernelFamily::EnergyDistance: return "energy";
  }
  return "unknown";
}

std::string to_string(KernelForm form) {
  return form == KernelForm::TensorProduct ? "tensor_product" : "anisotropic_distance";
}

KernelFamily parse_family(const std::string& text) {
  if (text == "matern12") return KernelFamily::Matern12;
  if (text == "matern32") return KernelFamily::Matern32;
  if (text == "matern52") return KernelFamily::Matern52;
  if (text == "energy") return KernelFamily::EnergyDistance;
  throw ValidationError("unknown kernel family '" + text + "'");
}

KernelForm parse_form(const std::string& text) {
  if (text == "tensor_product") return KernelForm::TensorProduct;
  if (text == "anisotropic_distance") return KernelForm::AnisotropicDistance;
  throw ValidationError("unknown kernel form '" + text + "'");
}

KernelSpec KernelSpec::matern52_tensor(const Vector& theta, double scale) {
  KernelSpec k{KernelFamily::Matern52, KernelForm::TensorProduct, theta, scale};
  k.validate();
  return k;
}

KernelSpec KernelSpec::matern52_tensor(Index dim, double theta, double scale) {
  return matern52_tensor(Vector::Constant(dim, theta), scale);
}

KernelSpec KernelSpec::matern52_anisotropic(const Vector& theta, double scale) {
  KernelSpec k{KernelFamily::Matern52, KernelForm::AnisotropicDistance, theta, scale};
  k.validate();
  return k;
}

KernelSpec KernelSpec::energy_distance(Index dim) {
  KernelSpec k{KernelFamily::EnergyDistance, KernelForm::AnisotropicDistance, Vector::Ones(dim), 1.0};
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (lengthscales.size() < 1) throw ValidationError("kernel needs at least one lengthscale");
  if (!(lengthscales.array() > 0).all() || !lengthscales.allFinite())
    throw ValidationError("kernel lengthscales must be positive");
  if (!(scale > 0) || !std::isfinite(scale)) throw ValidationError("kernel scale must be positive");
  if (family == KernelFamily::EnergyDistance) {
    if (form != KernelForm::AnisotropicDistance || !(lengthscales.array() == 1.0).all() || scale != 1.0)
      throw ValidationError("energy-distance kernel admits only the distance form with unit lengthscales");
  }
}

Matrix gram(const KernelSpec& spec, const PointSet& a, const PointSet& b) {
  check_dims(a.dim(), spec.dim(), "gram");
  check_dims(b.dim(), spec.dim(), "gram");
  Matrix k(a.size(), b.size());
  parallel_for(a.size(), [&](Index i) {
    for (Index j = 0; j < b.size(); ++j) k(i, j) = eval_kernel(spec, a.point(i), b.point(j));
  }, 16);
  return k;
}

Matrix gram(const KernelSpec& spec, const PointSet& a) {
  check_dims(a.dim(), spec.dim(), "gram");
  Matrix k(a.size(), a.size());
  parallel_for(a.size(), [&](Index i) {
    for (Index j = i; j < a.size(); ++j) k(i, j) = eval_kernel(spec, a.point(i), a.point(j));
  }, 16);
  k.triangularView<Eigen::StrictlyLower>() = k.transpose();
  return k;
}

JitteredCholesky factorize_with_jitter(const Matrix& k, double max_relative_jitter) {
  JitteredCholesky out;
  const Index n = k.rows();
  if (n == 0) return out;
  const double t = k.trace() / static_cast<double>(n);
  if (!(t > 0) || !k.allFinite()) throw ConditioningError("matrix has nonpositive or non-finite diagonal");
  for (double rel = 0.0; rel <= max_relative_jitter * (1 + 1e-9);
       rel = rel == 0.0 ? 1e-12 : rel * 10.0) {
    const double jitter = rel * t;
    Matrix kj = k;
    kj.diagonal().array() += jitter;
    out.llt.compute(kj);
    if (out.llt.info() == Eigen::Success) {
      const auto diag = out.llt.matrixLLT().diagonal();
      if (diag.allFinite() && (diag.array() > 0).all()) {
        out.jitter = jitter;
        return out;
      }
    }
  }
  throw ConditioningError("factorization failed after jitter escalation to " +
                          std::to_string(max_relative_jitter) + " x mean diagonal");
}

// ---------------------------------------------------------------------------
// ConditionedKernel

ConditionedKernel::ConditionedKernel(KernelSpec base, PointSet design)
    : base_(std::move(base)), design_(std::move(design)) {
  base_.validate();
  if (!base_.positive_definite()) {
    throw UnsupportedError("energy-distance kernel is not positive definite and cannot be conditioned");
  }
  if (design_.size() == 0 && design_.dim() == 0) design_ = PointSet(base_.dim());
  check_dims(design_.dim(), base_.dim(), "condition");
  for (Index i = 0; i < design_.size(); ++i) {
    for (Index j = i + 1; j < design_.size(); ++j) {
      if ((design_.point(i) - design_.point(j)).cwiseAbs().maxCoeff() <= 1e-12) {
        throw DegenerateError("training design has duplicated rows " + std::to_string(i) + " and " +
                              std::to_string(j));
      }
    }
  }
  if (design_.size() > 0) {
    auto chol = factorize_with_jitter(tessel::gram(base_, design_));
    llt_ = std::move(chol.llt);
    jitter_ = chol.jitter;
  }
}

ConditionedKernel condition(const KernelSpec& spec, const PointSet& design) {
  return ConditionedKernel(spec, design);
}

Matrix ConditionedKernel::whiten_cross(const Matrix& k_ma) const {
  if (size() == 0) return Matrix(0, k_ma.cols());
  return llt_.matrixL().solve(k_ma);
}

Matrix ConditionedKernel::whiten(const PointSet& a) const {
  if (size() == 0) return Matrix(0, a.size());
  return whiten_cross(tessel::gram(base_, design_, a));
}

Vector ConditionedKernel::solve(const Vector& rhs) const {
  check_dims(rhs.size(), size(), "ConditionedKernel::solve");
  if (size() == 0) return Vector(0);
  return llt_.solve(rhs);
}

double ConditionedKernel::log_det() const {
  if (size() == 0) return 0.0;
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Matrix ConditionedKernel::gram(const PointSet& a, const PointSet& b) const {
  Matrix k = tessel::gram(base_, a, b);
  if (size() > 0) k.noalias() -= whiten(a).transpose() * whiten(b);
  return k;
}

Matrix ConditionedKernel::gram(const PointSet& a) const {
  Matrix k = tessel::gram(base_, a);
  if (size() > 0) {
    const Matrix w = whiten(a);
    k.noalias() -= w.transpose() * w;
  }
  return k;
}

Vector ConditionedKernel::variance(const PointSet& a) const {
  Vector v(a.size());
  for (Index i = 0; i < a.size(); ++i) v(i) = eval_kernel(base_, a.point(i), a.point(i));
  if (size() > 0) v -= whiten(a).colwise().squaredNorm().transpose();
  return v;
}

// ---------------------------------------------------------------------------
// Fourth-moment kernels

FourthMomentKernel::FourthMomentKernel(ConditionedKernel ck, PointFunction mean, Kind kind)
    : ck_(std::move(ck)), mean_(std::move(mean)), kind_(kind) {}

FourthMomentKernel kbar(const ConditionedKernel& ck, PointFunction error_mean) {
  return FourthMomentKernel(ck, std::move(error_mean), FourthMomentKernel::Kind::Residual);
}

FourthMomentKernel kbar_prime(const ConditionedKernel& ck, PointFunction predictor, double train_mean) {
  PointFunction centred;
  if (predictor) {
    centred = [predictor = std::move(predictor), train_mean](const PointSet& a) -> Vector {
      return (predictor(a).array() - train_mean).matrix();
    };
  } else {
    centred = [train_mean](const PointSet& a) -> Vector { return Vector::Constant(a.size(), -train_mean); };
  }
  return FourthMomentKernel(ck, std::move(centred), FourthMomentKernel::Kind::Centred);
}

Vector FourthMomentKernel::mean_at(const PointSet& a) const {
  if (!mean_) return Vector::Zero(a.size());
  Vector m = mean_(a);
  check_dims(m.size(), a.size(), "kernel mean function");
  return m;
}

Matrix FourthMomentKernel::assemble(const Matrix& cov, const Vector& var_a, const Vector& var_b,
                                    const Vector& mean_a, const Vector& mean_b) const {
  if (kind_ == Kind::Residual) return fourth_moment(cov, var_a, var_b, mean_a, mean_b);
  // K-bar with zero error mean, plus the centred-predictor terms.
  const Vector zero_a = Vector::Zero(cov.rows());
  const Vector zero_b = Vector::Zero(cov.cols());
  const Vector sq_a = mean_a.array().square();
  const Vector sq_b = mean_b.array().square();
  return fourth_moment(cov, var_a, var_b, zero_a, zero_b) + sq_a * sq_b.transpose() +
         sq_a * var_b.transpose() + var_a * sq_b.transpose() +
         4.0 * (mean_a * mean_b.transpose()).cwiseProduct(cov);
}

Matrix FourthMomentKernel::gram(const PointSet& a, const PointSet& b) const {
  return assemble(ck_.gram(a, b), ck_.variance(a), ck_.variance(b), mean_at(a), mean_at(b));
}

Matrix FourthMomentKernel::gram(const PointSet& a) const {
  const Vector var = ck_.variance(a);
  const Vector mean = mean_at(a);
  Matrix k = assemble(ck_.gram(a), var, var, mean, mean);
  // Exact symmetry regardless of rounding in the assembly.
  k.triangularView<Eigen::StrictlyLower>() = k.transpose();
  return k;
}

namespace {

constexpr Index kBlock = 1024;

}  // namespace

Vector FourthMomentKernel::potential(const PointSet& a, const PointSet& sample) const {
  if (sample.size() == 0) throw ValidationError("potential needs a nonempty measure sample");
  const Matrix wa = ck_.whiten(a);
  const Vector var_a = ck_.variance(a);
  const Vector mean_a = mean_at(a);
  Vector total = Vector::Zero(a.size());
  for (Index start = 0; start < sample.size(); start += kBlock) {
    const Index len = std::min(kBlock, sample.size() - start);
    const PointSet block(Matrix(sample.matrix().middleRows(start, len)));
    const Matrix wb = ck_.whiten(block);
    Matrix cov = tessel::gram(ck_.base(), a, block);
    if (ck_.size() > 0) cov.noalias() -= wa.transpose() * wb;
    Vector var_b = Vector::Constant(len, ck_.base().scale);
    if (ck_.size() > 0) var_b -= wb.colwise().squaredNorm().transpose();
    total += assemble(cov, var_a, var_b, mean_a, mean_at(block)).rowwise().sum();
  }
  return total / static_cast<double>(sample.size());
}

double FourthMomentKernel::energy(const PointSet& sample) const {
  if (sample.size() == 0) throw ValidationError("energy needs a nonempty measure sample");
  double total = 0.0;
  for (Index start = 0; start < sample.size(); start += kBlock) {
    const Index len = std::min(kBlock, sample.size() - start);
    const PointSet block(Matrix(sample.matrix().middleRows(start, len)));
    total += potential(block, sample).sum();
  }
  return total / static_cast<double>(sample.size());
}

}  // namespace tessel
