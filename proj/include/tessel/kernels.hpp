#pragma once

#include <tessel/matern.hpp>
#include <tessel/measures.hpp>

#include <functional>
#include <string>

namespace tessel {

enum class KernelForm { TensorProduct, AnisotropicDistance };

std::string to_string(KernelFamily family);
std::string to_string(KernelForm form);
KernelFamily parse_family(const std::string& text);
KernelForm parse_form(const std::string& text);

/// Kernel family, combination form, per-dimension correlation lengths and
/// variance. The energy-distance kernel ignores lengthscales and is only
/// conditionally positive definite.
struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  KernelForm form = KernelForm::TensorProduct;
  Vector lengthscales;
  double scale = 1.0;

  static KernelSpec matern52_tensor(const Vector& theta, double scale = 1.0);
  static KernelSpec matern52_tensor(Index dim, double theta, double scale = 1.0);
  static KernelSpec matern52_anisotropic(const Vector& theta, double scale = 1.0);
  static KernelSpec energy_distance(Index dim);

  Index dim() const { return lengthscales.size(); }
  bool positive_definite() const { return family != KernelFamily::EnergyDistance; }

  /// Throws ValidationError when an invariant is violated.
  void validate() const;
};

template <typename DerivedA, typename DerivedB>
double eval_kernel(const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& x,
                   const Eigen::MatrixBase<DerivedB>& y) {
  check_dims(x.size(), spec.dim(), "eval_kernel");
  check_dims(y.size(), spec.dim(), "eval_kernel");
  if (spec.family == KernelFamily::EnergyDistance) {
    return 0.5 * (x.norm() + y.norm() - (x - y).norm());
  }
  if (spec.form == KernelForm::TensorProduct) {
    double k = spec.scale;
    for (Index i = 0; i < x.size(); ++i) {
      k *= matern_correlation(spec.family, (x(i) - y(i)) / spec.lengthscales(i));
    }
    return k;
  }
  // Indexed loop: x and y may be rows or columns.
  double r2 = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = (x(i) - y(i)) / spec.lengthscales(i);
    r2 += h * h;
  }
  return spec.scale * matern_correlation(spec.family, std::sqrt(r2));
}

/// Cross-gram matrix K(a_i, b_j).
Matrix gram(const KernelSpec& spec, const PointSet& a, const PointSet& b);

/// Symmetric gram matrix K(a_i, a_j), each unordered pair evaluated once.
Matrix gram(const KernelSpec& spec, const PointSet& a);

/// Cholesky factor of K + jitter I, escalating jitter by decades
/// (0, 1e-12 t, ..., 1e-6 t with t = trace / size) until it succeeds.
struct JitteredCholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;
};
JitteredCholesky factorize_with_jitter(const Matrix& k, double max_relative_jitter = 1e-6);

/// A base kernel conditioned on a training design:
///   K_{|m}(x, x') = K(x, x') - k_m(x)^T K_m^{-1} k_m(x').
class ConditionedKernel {
 public:
  ConditionedKernel(KernelSpec base, PointSet design);

  const KernelSpec& base() const { return base_; }
  const PointSet& design() const { return design_; }
  Index size() const { return design_.size(); }
  double jitter() const { return jitter_; }

  /// L^{-1} K(X_m, a), an m x |a| matrix.
  Matrix whiten(const PointSet& a) const;
  Matrix whiten_cross(const Matrix& k_ma) const;

  /// (K_m + jitter I)^{-1} rhs.
  Vector solve(const Vector& rhs) const;
  double log_det() const;

  Matrix gram(const PointSet& a, const PointSet& b) const;
  Matrix gram(const PointSet& a) const;
  Vector variance(const PointSet& a) const;

  template <typename DerivedA, typename DerivedB>
  double operator()(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) const {
    const PointSet a{Matrix(x.derived().reshaped(1, x.size()))};
    const PointSet b{Matrix(y.derived().reshaped(1, y.size()))};
    return gram(a, b)(0, 0);
  }

 private:
  KernelSpec base_;
  PointSet design_;
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

/// Builds the conditioned kernel; rejects conditionally positive definite
/// kernels and duplicated design rows.
ConditionedKernel condition(const KernelSpec& spec, const PointSet& design);

/// A function evaluated pointwise on a set, e.g. an error interpolant or a
/// centred predictor. An empty function means identically zero.
using PointFunction = std::function<Vector(const PointSet&)>;

/// Expected product of squared Gaussian variables:
///   E{U^2 V^2} = 2 (C + 2 a b) C + (a^2 + s)(b^2 + t)
/// for means a, b, variances s, t and covariance C, applied elementwise.
inline Matrix fourth_moment(const Matrix& cov, const Vector& var_a, const Vector& var_b,
                            const Vector& mean_a, const Vector& mean_b) {
  return 2.0 * (cov + 2.0 * mean_a * mean_b.transpose()).cwiseProduct(cov) +
         (mean_a.array().square() + var_a.array()).matrix() *
             (mean_b.array().square() + var_b.array()).matrix().transpose();
}

/// K-bar_{|m}: the kernel governing the mean-squared error of weighted
/// squared-residual averages. `kbar` uses the error interpolant as mean;
/// `kbar_prime` adds the centred-predictor terms of the alternative
/// (denominator) estimator.
class FourthMomentKernel {
 public:
  enum class Kind { Residual, Centred };

  FourthMomentKernel(ConditionedKernel ck, PointFunction mean, Kind kind);

  const ConditionedKernel& conditioned() const { return ck_; }
  Kind kind() const { return kind_; }

  Matrix gram(const PointSet& a, const PointSet& b) const;
  Matrix gram(const PointSet& a) const;

  /// p_i = (1/N) sum_k K-bar(a_i, s_k).
  Vector potential(const PointSet& a, const PointSet& sample) const;

  /// (1/N^2) sum_{k,l} K-bar(s_k, s_l), accumulated in row blocks.
  double energy(const PointSet& sample) const;

  template <typename DerivedA, typename DerivedB>
  double operator()(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) const {
    const PointSet a{Matrix(x.derived().reshaped(1, x.size()))};
    const PointSet b{Matrix(y.derived().reshaped(1, y.size()))};
    return gram(a, b)(0, 0);
  }

 private:
  Vector mean_at(const PointSet& a) const;
  Matrix assemble(const Matrix& cov, const Vector& var_a, const Vector& var_b, const Vector& mean_a,
                  const Vector& mean_b) const;

  ConditionedKernel ck_;
  PointFunction mean_;
  Kind kind_;
};

FourthMomentKernel kbar(const ConditionedKernel& ck, PointFunction error_mean = {});
FourthMomentKernel kbar_prime(const ConditionedKernel& ck, PointFunction predictor, double train_mean);

}  // namespace tessel
