#pragma once

#include <tessel/kernels.hpp>
#include <tessel/special.hpp>

#include <memory>
#include <mutex>
#include <numbers>
#include <type_traits>

namespace tessel {

/// Potential of the uniform measure on [0,1] for the Matern 5/2 kernel.
template <typename Scalar>
Scalar potential_uniform_matern52(Scalar x, Scalar theta) {
  using std::exp;
  using std::sqrt;
  const Scalar s5 = sqrt(Scalar(5));
  auto edge = [&](Scalar t) {
    return exp(-s5 * t / theta) * (5 * s5 * t * t + 25 * theta * t + 8 * s5 * theta * theta);
  };
  return 16 * theta / (3 * s5) - (edge(x) + edge(1 - x)) / (15 * theta);
}

namespace detail {

template <typename Scalar>
Scalar normal_potential_half(Scalar x, Scalar theta) {
  using std::exp;
  using std::sqrt;
  const Scalar c = 5 / (theta * theta);
  const Scalar s = sqrt(Scalar(5)) / theta;
  const Scalar poly = (c * x * x + (3 - 2 * c) * s * x + c * (c - 2) + 3) / 6;
  // erfc(a) exp(c/2 - s x) == erfcx(a) exp(-x^2/2) for a >= 0; the scaled form
  // cannot overflow.
  const Scalar a = (s - x) / std::numbers::sqrt2_v<Scalar>;
  const Scalar tail = a >= 0 ? erfcx(a) * exp(-x * x / 2) : std::erfc(a) * exp(c / 2 - s * x);
  return poly * tail + s * (3 - c) * exp(-x * x / 2) / (3 * sqrt(2 * std::numbers::pi_v<Scalar>));
}

}  // namespace detail

/// Potential of the standard normal measure for the Matern 5/2 kernel.
///
/// The polynomial-times-erfcx term and the Gaussian term cancel to leading
/// order (s^3, s = sqrt(5)/theta), so doubles are evaluated in long double.
template <typename Scalar>
Scalar potential_normal_matern52(Scalar x, Scalar theta) {
  using Wide = std::conditional_t<std::is_same_v<Scalar, double>, long double, Scalar>;
  const Wide wx = x, wt = theta;
  return static_cast<Scalar>(detail::normal_potential_half(wx, wt) + detail::normal_potential_half(-wx, wt));
}

double checked_potential_uniform_matern52(double x, double theta);
double checked_potential_normal_matern52(double x, double theta);

enum class PotentialMode { Analytic, Empirical };
enum class EnergyMode { Absolute, Relative };

/// Kernel embedding P_{K,mu}(x) = int K(x, x') dmu(x').
///
/// Analytic mode covers tensor Matern 5/2 kernels against product measures
/// whose marginals are all U(0,1) or N(0,1); the double integral E_K(mu) is
/// then estimated once from 2^14 transformed Sobol points. Empirical mode
/// averages the kernel over stored atoms.
class Potential {
 public:
  static Potential analytic(const KernelSpec& kernel, const TargetMeasure& mu);
  static Potential empirical(const KernelSpec& kernel, const PointSet& atoms, const Vector& weights = {});
  /// Analytic when supported, otherwise empirical over `mu` (if empirical) or
  /// over `fallback` atoms.
  static Potential for_measure(const KernelSpec& kernel, const TargetMeasure& mu, const PointSet& fallback);

  static bool analytic_supported(const KernelSpec& kernel, const TargetMeasure& mu);

  PotentialMode mode() const { return mode_; }
  const KernelSpec& kernel() const { return kernel_; }
  const PointSet& atoms() const { return atoms_; }
  const Vector& atom_weights() const { return weights_; }

  template <typename Derived>
  double operator()(const Eigen::MatrixBase<Derived>& x) const {
    check_dims(x.size(), kernel_.dim(), "potential");
    if (mode_ == PotentialMode::Analytic) {
      double p = kernel_.scale;
      for (Index i = 0; i < x.size(); ++i) {
        const double theta = kernel_.lengthscales(i);
        p *= normal_axis_[static_cast<std::size_t>(i)] ? potential_normal_matern52(double(x(i)), theta)
                                                       : potential_uniform_matern52(double(x(i)), theta);
      }
      return p;
    }
    double p = 0.0;
    for (Index k = 0; k < atoms_.size(); ++k) {
      p += weights_(k) * eval_kernel(kernel_, x, atoms_.point(k));
    }
    return p;
  }

  Vector evaluate(const PointSet& x) const;

  /// E_K(mu) = double integral of K against mu; cached after the first call.
  double energy() const;

 private:
  Potential() = default;

  KernelSpec kernel_;
  PotentialMode mode_ = PotentialMode::Empirical;
  std::vector<bool> normal_axis_;
  PointSet atoms_;
  Vector weights_;
  TargetMeasure measure_;

  struct EnergyCache {
    std::once_flag once;
    double value = 0.0;
  };
  std::shared_ptr<EnergyCache> energy_ = std::make_shared<EnergyCache>();
};

inline constexpr Index kEnergyQmcPoints = Index{1} << 14;

/// w^T G w - 2 w^T p + energy.
inline double mmd_squared(const Matrix& gram, const Vector& weights, const Vector& potential, double energy) {
  return weights.dot(gram * weights) - 2.0 * weights.dot(potential) + energy;
}

/// Squared MMD between sum_i w_i delta_{x_i} and the measure behind `mu`.
/// Relative mode omits E_K(mu), which does not affect any argmin.
double mmd_squared(const PointSet& x, const Vector& weights, const Potential& mu,
                   EnergyMode mode = EnergyMode::Absolute);
double mmd_squared(const PointSet& x, const Potential& mu, EnergyMode mode = EnergyMode::Absolute);

}  // namespace tessel
