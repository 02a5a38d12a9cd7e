#include "oracles.hpp"

#include <tessel/discrepancy.hpp>

#include <doctest.h>

using namespace tessel;

namespace {

PointSet random_points(Index n, Index d, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Matrix m(n, d);
  for (Index i = 0; i < m.size(); ++i) m(i) = lo + (hi - lo) * rng.uniform();
  return PointSet(m);
}

Vector random_simplex(Index n, Rng& rng) {
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = rng.uniform_open();
  return w / w.sum();
}

}  // namespace

TEST_SUITE("discrepancy") {

TEST_CASE("uniform potential: frozen high-precision values") {
  CHECK(potential_uniform_matern52(0.5, 0.2) == doctest::Approx(0.46206380625864097).epsilon(1e-14));
  CHECK(potential_uniform_matern52(0.0, 0.2) == doctest::Approx(0.23843537601070806).epsilon(1e-14));
  CHECK(potential_uniform_matern52(0.3, 1.3) == doctest::Approx(0.9467169562292073).epsilon(1e-14));
}

TEST_CASE("normal potential: frozen high-precision values") {
  CHECK(potential_normal_matern52(0.0, 0.7) == doctest::Approx(0.5367621496387861).epsilon(1e-13));
  CHECK(potential_normal_matern52(3.0, 0.7) == doctest::Approx(0.031094542457794822).epsilon(1e-13));
  CHECK(potential_normal_matern52(-1.2, 0.05) == doctest::Approx(0.023173199402277044).epsilon(1e-13));
  CHECK(potential_normal_matern52(0.4, 2.0) == doctest::Approx(0.8424407969041797).epsilon(1e-13));
}

TEST_CASE("potentials against quadrature oracles") {
  Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    const double theta = 0.05 + 1.95 * rng.uniform();
    const double xu = rng.uniform();
    const double xn = -4.0 + 8.0 * rng.uniform();
    CHECK(std::abs(potential_uniform_matern52(xu, theta) - oracle::uniform_potential(xu, theta)) <= 1e-8);
    CHECK(std::abs(potential_normal_matern52(xn, theta) - oracle::normal_potential(xn, theta)) <= 1e-8);
  }
}

TEST_CASE("normal potential is even, finite far in the tails and bounded by 1") {
  for (double x : {0.3, 2.0, 9.0, 40.0}) {
    for (double theta : {0.01, 0.5, 5.0}) {
      const double p = potential_normal_matern52(x, theta);
      CHECK(p == doctest::Approx(potential_normal_matern52(-x, theta)).epsilon(1e-14));
      CHECK(std::isfinite(p));
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
  CHECK(potential_uniform_matern52(0.2, 0.4) == doctest::Approx(potential_uniform_matern52(0.8, 0.4)).epsilon(1e-15));
}

TEST_CASE("checked potentials reject invalid input") {
  CHECK_THROWS_AS(checked_potential_uniform_matern52(1.2, 0.3), DomainError);
  CHECK_THROWS_AS(checked_potential_uniform_matern52(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(checked_potential_normal_matern52(INFINITY, 0.3), DomainError);
  CHECK_THROWS_AS(checked_potential_normal_matern52(0.1, -1.0), DomainError);
}

TEST_CASE("tensor potentials factor over coordinates") {
  const Vector theta{{0.2, 0.9, 1.4}};
  const auto k = KernelSpec::matern52_tensor(theta);
  const auto mu = TargetMeasure::parse("product:U(0,1),N(0,1),U(0,1)");
  const auto p = Potential::analytic(k, mu);
  CHECK(p.mode() == PotentialMode::Analytic);
  const Vector x{{0.3, -0.7, 0.95}};
  const double expected = potential_uniform_matern52(0.3, 0.2) * potential_normal_matern52(-0.7, 0.9) *
                          potential_uniform_matern52(0.95, 1.4);
  CHECK(p(x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("analytic support is limited to tensor Matern 5/2 with U(0,1) or N(0,1)") {
  const auto k2 = KernelSpec::matern52_tensor(2, 0.3);
  CHECK(Potential::analytic_supported(k2, TargetMeasure::unit_cube(2)));
  CHECK(Potential::analytic_supported(k2, TargetMeasure::standard_normal(2)));
  CHECK_FALSE(Potential::analytic_supported(k2, TargetMeasure::parse("product:U(0,2),N(0,1)")));
  CHECK_FALSE(Potential::analytic_supported(k2, TargetMeasure::parse("product:LN(0,1),N(0,1)")));
  CHECK_FALSE(Potential::analytic_supported(KernelSpec::matern52_anisotropic(Vector{{0.3, 0.3}}),
                                            TargetMeasure::unit_cube(2)));
  CHECK_FALSE(Potential::analytic_supported(k2, TargetMeasure::unit_cube(3)));
  CHECK_THROWS_AS(Potential::analytic(KernelSpec::energy_distance(2), TargetMeasure::unit_cube(2)),
                  UnsupportedError);

  const PointSet fallback(Matrix::Constant(3, 2, 0.5));
  const auto p = Potential::for_measure(k2, TargetMeasure::parse("product:U(0,2),N(0,1)"), fallback);
  CHECK(p.mode() == PotentialMode::Empirical);
  CHECK(p.atoms().size() == 3);
}

TEST_CASE("empirical potential: single atom and averages") {
  const auto k = KernelSpec::matern52_tensor(2, 0.4);
  const Vector c{{0.2, 0.7}};
  const auto single = Potential::empirical(k, PointSet(Matrix(c.transpose())));
  const Vector x{{0.5, 0.5}};
  CHECK(single(x) == eval_kernel(k, x, c));
  CHECK(single.energy() == doctest::Approx(1.0));

  Rng rng(22);
  const PointSet atoms = random_points(40, 2, rng);
  const Vector w = random_simplex(40, rng);
  const auto weighted = Potential::empirical(k, atoms, w);
  double expected = 0.0;
  for (Index i = 0; i < 40; ++i) expected += w(i) * oracle::tensor_matern52(x, atoms.point(i).transpose(), 0.4);
  CHECK(weighted(x) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("analytic and Sobol-empirical potentials agree") {
  const auto k = KernelSpec::matern52_tensor(2, 0.2);
  const auto analytic = Potential::analytic(k, TargetMeasure::unit_cube(2));
  const auto qmc = Potential::empirical(k, sobol_sequence(2, Index{1} << 14));
  Rng rng(23);
  const PointSet x = random_points(20, 2, rng);
  CHECK((analytic.evaluate(x) - qmc.evaluate(x)).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("analytic energy against a quadrature oracle") {
  const oracle::Rule rule = oracle::gauss_legendre(64);
  // Uniform, d = 1: integral of the potential.
  const double eu = oracle::integrate(rule, [](double x) { return oracle::uniform_potential(x, 0.3); }, 0.0, 1.0);
  const auto pu = Potential::analytic(KernelSpec::matern52_tensor(1, 0.3), TargetMeasure::unit_cube(1));
  CHECK(pu.energy() == doctest::Approx(eu).epsilon(1e-4));
  // Normal, d = 1: integral of P(x) phi(x).
  auto g = [](double x) { return oracle::normal_potential(x, 0.8) * std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
  const double en = oracle::integrate(rule, g, -8.0, 8.0);
  const auto pn = Potential::analytic(KernelSpec::matern52_tensor(1, 0.8), TargetMeasure::standard_normal(1));
  CHECK(pn.energy() == doctest::Approx(en).epsilon(1e-3));
}

TEST_CASE("mmd of a measure against itself vanishes and is never negative") {
  Rng rng(24);
  for (int t = 0; t < 10; ++t) {
    const auto k = KernelSpec::matern52_tensor(3, 0.1 + rng.uniform());
    const PointSet atoms = random_points(25, 3, rng);
    const Vector w = random_simplex(25, rng);
    const auto mu = Potential::empirical(k, atoms, w);
    CHECK(std::abs(mmd_squared(atoms, w, mu)) <= 1e-10);
    const PointSet other = random_points(12, 3, rng);
    CHECK(mmd_squared(other, random_simplex(12, rng), mu) >= -1e-10);
  }
  const auto k = KernelSpec::matern52_tensor(2, 0.3);
  const PointSet s = sobol_sequence(2, 64);
  CHECK(std::abs(mmd_squared(s, Potential::empirical(k, s))) <= 1e-10);
}

TEST_CASE("two single atoms at distance r") {
  const auto k = KernelSpec::matern52_tensor(1, 1.0);
  const auto mu = Potential::empirical(k, PointSet(Matrix::Constant(1, 1, 0.0)));
  const PointSet x(Matrix::Constant(1, 1, 1.0));
  CHECK(mmd_squared(x, mu) == doctest::Approx(2.0 * (1.0 - oracle::matern52(1.0, 1.0))).epsilon(1e-14));
  CHECK(mmd_squared(x, mu, EnergyMode::Relative) == doctest::Approx(1.0 - 2.0 * oracle::matern52(1.0, 1.0)));
  CHECK_THROWS_AS(mmd_squared(PointSet(1), mu), ValidationError);
}

TEST_CASE("energy-kernel mmd equals half the double-loop energy distance") {
  // The energy-distance expression 2E|x - z| - E|x - x'| - E|z - z'| equals
  // twice the MMD under K_E = (|x| + |x'| - |x - x'|) / 2.
  Rng rng(25);
  const PointSet cand = random_points(100, 2, rng);
  const auto mu = Potential::empirical(KernelSpec::energy_distance(2), cand);
  Index best = 0;
  double best_sum = INFINITY;
  for (Index i = 0; i < 100; ++i) {
    double s = 0.0;
    for (Index k = 0; k < 100; ++k) s += (cand.point(i) - cand.point(k)).norm();
    if (s < best_sum) {
      best_sum = s;
      best = i;
    }
  }
  double cross = 0.0, self = 0.0;
  for (Index k = 0; k < 100; ++k) {
    cross += (cand.point(best) - cand.point(k)).norm();
    for (Index l = 0; l < 100; ++l) self += (cand.point(k) - cand.point(l)).norm();
  }
  const double energy_distance = 2.0 * cross / 100.0 - self / 1e4;
  const std::vector<Index> rows{best};
  CHECK(mmd_squared(cand.subset(rows), mu) == doctest::Approx(0.5 * energy_distance).epsilon(1e-12));
}

}
