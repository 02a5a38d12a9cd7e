#include "oracles.hpp"

#include <tessel/measures.hpp>
#include <tessel/special.hpp>

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace tessel;

TEST_SUITE("measures") {

TEST_CASE("point set subset, head and concat keep row order") {
  Matrix m(3, 2);
  m << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  const PointSet p(m);
  const std::vector<Index> rows{2, 0};
  const PointSet s = p.subset(rows);
  CHECK(s.size() == 2);
  CHECK(s.matrix()(0, 0) == 0.5);
  CHECK(s.matrix()(1, 1) == 0.2);
  CHECK(p.head(1).matrix()(0, 1) == 0.2);

  const PointSet c = PointSet::concat(p, s);
  CHECK(c.size() == 5);
  CHECK(c.matrix().bottomRows(2) == s.matrix());
  CHECK(PointSet::concat(PointSet(), p) == p);

  const std::vector<Index> bad{3};
  CHECK_THROWS_AS(p.subset(bad), ValidationError);
  CHECK_THROWS_AS(PointSet::concat(p, PointSet(Matrix::Zero(1, 3))), DimensionMismatch);
  CHECK_THROWS_AS(PointSet(Matrix::Constant(1, 1, std::nan(""))), DomainError);
}

TEST_CASE("normal quantile against a quadrature-and-bisection oracle") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
  for (double p : {1e-10, 1e-4, 0.01, 0.02425, 0.1, 0.3, 0.5, 0.77, 0.97575, 0.999, 0.9999}) {
    CHECK(normal_quantile(p) == doctest::Approx(oracle::normal_quantile(p)).epsilon(1e-10));
  }
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK(std::isinf(normal_quantile(1.0)));
}

TEST_CASE("erfcx is continuous across the asymptotic switch") {
  const double below = std::nextafter(25.0, 0.0);
  CHECK(erfcx(below) == doctest::Approx(erfcx(25.0)).epsilon(1e-14));
  CHECK(erfcx(0.0) == 1.0);
  // exp(x^2) erfc(x) -> 1 / (x sqrt(pi))
  CHECK(erfcx(1e6) * 1e6 * std::sqrt(std::numbers::pi) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("marginal quantile and cdf are mutual inverses") {
  const std::vector<Marginal> ms{UniformMarginal{-2.0, 3.0}, NormalMarginal{1.0, 2.5}, LogNormalMarginal{0.0, 0.5}};
  for (const auto& m : ms) {
    for (double u : {0.001, 0.2, 0.5, 0.9, 0.999}) {
      CHECK(cdf(m, quantile(m, u)) == doctest::Approx(u).epsilon(1e-12));
    }
  }
  CHECK(quantile(LogNormalMarginal{0.0, 0.5}, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("measure text specifications") {
  CHECK(TargetMeasure::parse("uniform:d=3").is_unit_cube());
  CHECK(TargetMeasure::parse("uniform:d=3").dim() == 3);
  const auto n = TargetMeasure::parse("normal:d=2");
  CHECK(n.is_product());
  CHECK(n.describe() == "normal:d=2");
  const auto p = TargetMeasure::parse("product:U(0,1),N(0,1),LN(0,0.5)");
  CHECK(p.dim() == 3);
  CHECK(TargetMeasure::parse(p.describe()).describe() == p.describe());
  CHECK_THROWS_AS(TargetMeasure::parse("cauchy:d=2"), ValidationError);
  CHECK_THROWS_AS(TargetMeasure::parse("product:U(0,1),X(1,2)"), ValidationError);
  CHECK_THROWS_AS(TargetMeasure::parse("product:U(1,0)"), ValidationError);
  CHECK_THROWS_AS(TargetMeasure::parse("uniform:d=0"), ValidationError);
}

TEST_CASE("empirical measure weights are validated") {
  const PointSet atoms(Matrix::Zero(2, 1));
  CHECK_NOTHROW(TargetMeasure::empirical(atoms));
  CHECK_THROWS_AS(TargetMeasure::empirical(atoms, Vector::Constant(2, 0.6)), ValidationError);
  CHECK_THROWS_AS(TargetMeasure::empirical(atoms, Vector{{1.5, -0.5}}), ValidationError);
  CHECK_THROWS_AS(TargetMeasure::empirical(atoms).marginals(), UnsupportedError);
}

TEST_CASE("measure sampling is seeded and has the right moments") {
  const auto mu = TargetMeasure::parse("product:U(2,4),N(1,3)");
  Rng a(5), b(5);
  const PointSet s = mu.sample(20000, a);
  CHECK(s == mu.sample(20000, b));
  CHECK(s.matrix().col(0).minCoeff() >= 2.0);
  CHECK(s.matrix().col(0).maxCoeff() <= 4.0);
  CHECK(s.matrix().col(0).mean() == doctest::Approx(3.0).epsilon(0.02));
  CHECK(s.matrix().col(1).mean() == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("unscrambled Sobol points match a frozen reference") {
  const Matrix s = sobol_sequence(5, 16).matrix();
  CHECK(s.row(0).isZero());
  const double expected[4][5] = {{.25, .75, .75, .75, .25},
                                 {.125, .625, .375, .125, .125},
                                 {.4375, .5625, .1875, .6875, .8125},
                                 {.0625, .9375, .5625, .3125, .6875}};
  const int rows[4] = {3, 7, 11, 15};
  for (int r = 0; r < 4; ++r) {
    for (int j = 0; j < 5; ++j) CHECK(s(rows[r], j) == expected[r][j]);
  }

  const Matrix hi = sobol_sequence(100, 1024).matrix();
  const std::vector<std::pair<int, double>> row1023{
      {0, 0.0009765625}, {1, 0.7529296875}, {50, 0.2587890625}, {98, 0.9716796875}, {99, 0.5302734375}};
  for (auto [j, v] : row1023) CHECK(hi(1023, j) == v);
  CHECK(hi(777, 2) == 0.1630859375);
  CHECK(hi(777, 40) == 0.7216796875);
  CHECK(hi(777, 99) == 0.5107421875);

  CHECK(sobol_sequence(3, 4, 12).matrix() == sobol_sequence(3, 16).matrix().bottomRows(4));
  CHECK_THROWS_AS(sobol_sequence(101, 4), UnsupportedError);
}

TEST_CASE("every Sobol coordinate of the first 2^k points is a permutation of j / 2^k") {
  const Index n = 256;
  const Matrix s = sobol_sequence(100, n).matrix();
  for (Index j = 0; j < 100; ++j) {
    std::set<Index> cells;
    for (Index i = 0; i < n; ++i) {
      const double scaled = s(i, j) * n;
      CHECK(scaled == std::floor(scaled));
      cells.insert(static_cast<Index>(scaled));
    }
    CHECK(cells.size() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("cube vertices enumerate bit patterns") {
  const Matrix v = cube_vertices(3).matrix();
  CHECK(v.rows() == 8);
  for (Index k = 0; k < 8; ++k) {
    for (Index j = 0; j < 3; ++j) CHECK(v(k, j) == double((k >> j) & 1));
  }
  CHECK_THROWS_AS(cube_vertices(21), ValidationError);
}

TEST_CASE("candidate set size and single origin") {
  const PointSet c = candidate_set(2, 50, true);
  CHECK(c.size() == 1000 * 2 + 2 * 50 + 4);
  Index origins = 0;
  for (Index i = 0; i < c.size(); ++i) origins += c.point(i).isZero() ? 1 : 0;
  CHECK(origins == 1);
  CHECK(candidate_set(2, 50, false).size() == 2100);
  CHECK(candidate_set(2, 50, false).point(0) == sobol_sequence(2, 1, 1).point(0));
  CHECK(in_unit_cube(c));
}

TEST_CASE("iso transform round trip and endpoint rules") {
  const auto mu = TargetMeasure::parse("product:U(-1,1),N(0,1),LN(0,0.5)");
  const PointSet u = sobol_sequence(3, 64, 1);
  const PointSet x = iso_transform(u, mu);
  CHECK((iso_transform_inverse(x, mu).matrix() - u.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(x.matrix()(0, 1) == 0.0);  // u = 0.5 maps to the normal median

  Matrix edge = Matrix::Constant(1, 3, 0.5);
  edge(0, 0) = 0.0;
  CHECK_NOTHROW(iso_transform(PointSet(edge), mu));
  edge(0, 1) = 0.0;
  CHECK_THROWS_AS(iso_transform(PointSet(edge), mu), DomainError);
  CHECK_THROWS_AS(iso_transform(PointSet(Matrix::Constant(1, 3, 1.5)), mu), DomainError);
}

TEST_CASE("latin hypercube occupies every stratum once per coordinate") {
  Rng rng(11);
  const Matrix x = latin_hypercube(4, 25, rng).matrix();
  for (Index j = 0; j < 4; ++j) {
    std::set<Index> strata;
    for (Index i = 0; i < 25; ++i) strata.insert(static_cast<Index>(std::floor(x(i, j) * 25)));
    CHECK(strata.size() == 25u);
  }
}

TEST_CASE("maximin exchange keeps the strata and never lowers the separation") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    const PointSet start = latin_hypercube(2, 20, rng);
    const PointSet best = maximin_lhs(2, 20, seed);
    CHECK(min_pairwise_distance(best) >= min_pairwise_distance(start));
    for (Index j = 0; j < 2; ++j) {
      std::vector<double> a(start.matrix().col(j).begin(), start.matrix().col(j).end());
      std::vector<double> b(best.matrix().col(j).begin(), best.matrix().col(j).end());
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
    CHECK(best == maximin_lhs(2, 20, seed));
  }
  CHECK_THROWS_AS(maximin_lhs(2, 1, 0), ValidationError);
}

TEST_CASE("min pairwise distance against brute force") {
  const PointSet p = sobol_sequence(3, 40, 1);
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < p.size(); ++i) {
    for (Index j = 0; j < i; ++j) best = std::min(best, (p.point(i) - p.point(j)).norm());
  }
  CHECK(min_pairwise_distance(p) == best);
}

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  Rng s1 = Rng(7).split(1), s2 = Rng(7).split(2);
  CHECK(s1() != s2());
  Rng u(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform_open();
    CHECK_FALSE((v <= 0.0 || v >= 1.0));
    sum += v;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  Rng r(9);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) counts[static_cast<std::size_t>(r.index(5))]++;
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

}
