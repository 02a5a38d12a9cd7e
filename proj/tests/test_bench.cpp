#include "oracles.hpp"

#include <tessel/serialize.hpp>

#include <doctest.h>

#include <set>
#include <sstream>

using namespace tessel;

TEST_SUITE("bench") {

TEST_CASE("test functions: frozen values and the oracle transcription") {
  CHECK(f2(Vector{{0.0, 0.0}}) == doctest::Approx(-0.4252620891999122).epsilon(1e-14));
  CHECK(gsobol(Vector::Constant(8, 0.5)) == doctest::Approx(0.3058677528903773).epsilon(1e-14));
  CHECK(gsobol(Vector::Zero(8)) == doctest::Approx(2.3157507500399808).epsilon(1e-14));
  CHECK(gsobol(Vector::Ones(8)) == doctest::Approx(2.3157507500399808).epsilon(1e-14));
  Rng rng(71);
  for (int t = 0; t < 50; ++t) {
    const double a = rng.uniform(), b = rng.uniform();
    CHECK(f1(Vector{{a, b}}) == doctest::Approx(oracle::f1(a, b)).epsilon(1e-14));
    const double u = -3.0 + 6.0 * rng.uniform(), v = -3.0 + 6.0 * rng.uniform();
    CHECK(f2(Vector{{u, v}}) == doctest::Approx(oracle::f2(u, v)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(f1(Vector{{0.1, 0.2, 0.3}}), DimensionMismatch);
}

TEST_CASE("presets and case names") {
  const TestCase a = TestCase::preset(CaseId::F1);
  CHECK(a.dim == 2);
  CHECK(a.mu.is_unit_cube());
  CHECK(a.herding_theta == 0.2);
  CHECK(a.n_min == 4);
  CHECK(a.n_max == 50);
  const TestCase b = TestCase::preset(CaseId::F2);
  CHECK_FALSE(b.vertices);
  CHECK_FALSE(b.mu.is_unit_cube());
  const TestCase c = TestCase::preset(CaseId::GSobol);
  CHECK(c.dim == 8);
  CHECK(c.herding_theta == 0.7);
  CHECK(c.m_grid.back() == 100);
  CHECK(parse_case("f3") == CaseId::GSobol);
  CHECK(to_string(parse_case("f2")) == "f2");
  CHECK_THROWS_AS(parse_case("f4"), ValidationError);
}

TEST_CASE("Monte-Carlo Q2 of exact and constant models") {
  const TestFunction f = test_function(CaseId::F1);
  const auto mu = TargetMeasure::unit_cube(2);
  CHECK(q2_mc(f, f, mu, 20000, 3) == 1.0);
  // A constant model at the sample mean scores exactly zero; any other constant less.
  Rng rng(3);
  const Vector fv = f(mu.sample(20000, rng));
  const double mean = fv.mean();
  auto constant = [mean](const PointSet& x) { return Vector(Vector::Constant(x.size(), mean)); };
  CHECK(q2_mc(f, constant, mu, 20000, 3) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(q2_mc(f, f, mu, 999, 3), ValidationError);
}

TEST_CASE("type-7 sample quantiles") {
  const std::vector<double> v{10.0, 1.0, 3.0, 2.0, 4.0};
  CHECK(sample_quantile(v, 0.0) == 1.0);
  CHECK(sample_quantile(v, 1.0) == 10.0);
  CHECK(sample_quantile(v, 0.5) == 3.0);
  CHECK(sample_quantile(v, 0.3) == doctest::Approx(2.2));
  CHECK(sample_quantile(v, 0.9) == doctest::Approx(7.6));
  CHECK(sample_quantile({5.0}, 0.7) == 5.0);
  CHECK_THROWS_AS(sample_quantile({}, 0.5), ValidationError);
  CHECK_THROWS_AS(sample_quantile(v, 1.5), ValidationError);
}

TEST_CASE("Spearman correlation with tied ranks") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 400}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  // Ranks (1, 2.5, 2.5, 4) against (4, 3, 2, 1).
  CHECK(spearman({1, 2, 2, 3}, {4, 3, 2, 1}) == doctest::Approx(-4.5 / std::sqrt(22.5)).epsilon(1e-14));
  CHECK_THROWS_AS(spearman({1, 1, 1}, {1, 2, 3}), DegenerateError);
  CHECK_THROWS_AS(spearman({1, 2}, {1, 2, 3}), ValidationError);
}

TEST_CASE("min-max normalization") {
  Matrix x(3, 3);
  x << 1.0, 5.0, 2.0, 3.0, 5.0, -2.0, 2.0, 5.0, 0.0;
  const PointSet z = minmax_normalize(PointSet(x));
  CHECK(z.matrix()(0, 0) == 0.0);
  CHECK(z.matrix()(1, 0) == 1.0);
  CHECK(z.matrix()(2, 0) == 0.5);
  CHECK(z.matrix().col(1).isConstant(0.5));
  CHECK(z.matrix()(1, 2) == 0.0);
  CHECK(z.matrix()(0, 2) == 1.0);
}

TEST_CASE("synthetic split dataset") {
  const Dataset a = synthetic_split_dataset(300, 4);
  const Dataset b = synthetic_split_dataset(300, 4);
  CHECK(a.inputs.size() == 300);
  CHECK(a.inputs.dim() == 8);
  CHECK(a.inputs.matrix() == b.inputs.matrix());
  for (Index j = 1; j < 8; j += 2) CHECK(a.inputs.matrix().col(j).minCoeff() > 0.0);
  CHECK(a.inputs.matrix().col(0).minCoeff() < 0.0);
  // gsobol of points in the unit cube stays within its corner bounds.
  CHECK(a.responses.minCoeff() > 0.0);
  CHECK(a.responses.maxCoeff() <= 2.3157507500399808);
}

TEST_CASE("small function benchmark: row layout and identities") {
  const TestCase tc = TestCase::preset(CaseId::F1);
  Section4Config cfg;
  cfg.m_values = {5};
  cfg.mc_size = 2000;
  cfg.loo = true;
  cfg.n_candidates = 256;
  const BenchResult r = run_section4(tc, cfg, 7);
  // q2_mc, q2_loo and three metrics per method per n in [4, 50].
  CHECK(r.rows.size() == 2u + 3u * 47u * 3u);
  for (const char* m : {"fssf", "support-points", "herding"}) {
    CHECK(std::isfinite(r.value(m, 5, 50, "q2_star")));
    CHECK(r.value(m, 5, 50, "weight_sum") > 0.0);
  }
  CHECK(r.value("baseline", 5, 0, "q2_mc") <= 1.0);
  for (const auto& row : r.rows) {
    CHECK(std::isfinite(row.value));
    if (row.metric != "weight_sum") CHECK(row.value <= 1.0);
  }
  CHECK_THROWS_AS(r.value("herding", 5, 51, "q2_hat"), ValidationError);

  const BenchResult again = run_section4(tc, cfg, 7);
  std::ostringstream s1, s2;
  write_bench_csv(s1, r);
  write_bench_csv(s2, again);
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().rfind("method,m,n,metric,value,seed\n", 0) == 0);

  const Json summary = bench_summary(r);
  CHECK(summary["rows"] == r.rows.size());
  CHECK(summary["final"].size() == 2u + 3u * 3u);
  for (const auto& row : summary["final"]) {
    if (row["method"] != "baseline") CHECK(row["n"] == 50);
  }
}

TEST_CASE("presets fit well at their largest training size") {
  for (CaseId id : {CaseId::F1, CaseId::F2, CaseId::GSobol}) {
    const TestCase tc = TestCase::preset(id);
    Section4Config cfg;
    cfg.methods.clear();
    cfg.m_values = {tc.m_grid.back()};
    cfg.mc_size = 20000;
    cfg.loo = false;
    const BenchResult r = run_section4(tc, cfg, 1);
    REQUIRE(r.rows.size() == 1u);
    CHECK(r.rows[0].value > 0.8);
    CHECK(r.rows[0].value <= 1.0);
  }
}

TEST_CASE("small split study: sizes, partitions and RCV quantiles") {
  const Dataset data = synthetic_split_dataset(60, 2);
  SplitConfig cfg;
  cfg.ratios = {0.2, 0.5};
  cfg.repetitions = 12;
  const BenchResult r = run_split_study(data, cfg, 5);
  CHECK(r.warnings.empty());
  CHECK(r.rows.size() == 2u * (2u * 3u + 6u));
  CHECK(r.value("herding", 48, 12, "weight_sum") > 0.0);
  CHECK(std::isfinite(r.value("support-points", 30, 30, "q2_star")));
  for (Index n : {12, 30}) {
    const Index m = 60 - n;
    CHECK(r.value("rcv", m, n, "q05") <= r.value("rcv", m, n, "q25"));
    CHECK(r.value("rcv", m, n, "q25") <= r.value("rcv", m, n, "q50"));
    CHECK(r.value("rcv", m, n, "q50") <= r.value("rcv", m, n, "q75"));
    CHECK(r.value("rcv", m, n, "q75") <= r.value("rcv", m, n, "q95"));
  }
  SplitConfig bad = cfg;
  bad.ratios = {1.0};
  CHECK_THROWS_AS(run_split_study(data, bad, 5), ValidationError);
  bad.ratios = {0.5};
  bad.repetitions = 0;
  CHECK_THROWS_AS(run_split_study(data, bad, 5), ValidationError);
}

}
