#pragma once

#include <cmath>

namespace tessel {

enum class KernelFamily { Matern12, Matern32, Matern52, EnergyDistance };

/// Matern correlation at scaled lag r = |x - x'| / theta.
template <typename Scalar>
Scalar matern_correlation(KernelFamily family, Scalar r) {
  using std::exp;
  using std::sqrt;
  r = r < 0 ? -r : r;
  switch (family) {
    case KernelFamily::Matern12:
      return exp(-r);
    case KernelFamily::Matern32: {
      const Scalar a = sqrt(Scalar(3)) * r;
      return (1 + a) * exp(-a);
    }
    case KernelFamily::Matern52: {
      const Scalar a = sqrt(Scalar(5)) * r;
      return (1 + a + a * a / 3) * exp(-a);
    }
    case KernelFamily::EnergyDistance:
      break;
  }
  return Scalar(0);
}

/// One-dimensional Matern 5/2 kernel with correlation length theta.
template <typename Scalar>
Scalar matern52(Scalar lag, Scalar theta) {
  return matern_correlation(KernelFamily::Matern52, lag / theta);
}

}  // namespace tessel
