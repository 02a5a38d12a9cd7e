#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "cli_support.hpp"

#include <tessel/csv.hpp>
#include <tessel/discrepancy.hpp>
#include <tessel/serialize.hpp>

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace tessel;

namespace {

Json read_json(const cli::Workspace& ws, const std::string& file) { return Json::parse(ws.slurp(file)); }

std::set<std::vector<double>> rows_of(const PointSet& p) {
  std::set<std::vector<double>> out;
  for (Index i = 0; i < p.size(); ++i) out.insert(std::vector<double>(p.point(i).begin(), p.point(i).end()));
  return out;
}

std::multiset<std::vector<double>> multirows_of(const Matrix& m) {
  std::multiset<std::vector<double>> out;
  for (Index i = 0; i < m.rows(); ++i) {
    const Vector r = m.row(i).transpose();
    out.insert(std::vector<double>(r.data(), r.data() + r.size()));
  }
  return out;
}

void write_random_points(const std::string& path, Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (Index i = 0; i < m.size(); ++i) m(i) = rng.uniform();
  write_points(path, PointSet(m));
}

}  // namespace

TEST_CASE("select is byte-identical across runs") {
  cli::Workspace ws("cli-select-determinism");
  for (const char* out : {"a.csv", "b.csv"}) {
    REQUIRE(ws.run(std::string("select --method herding --n 20 --measure uniform:d=2 --seed 1 --output ") + out) == 0);
  }
  CHECK(ws.slurp("a.csv") == ws.slurp("b.csv"));
  const Json a = read_json(ws, "a.json");
  Json b = read_json(ws, "b.json");
  b["config"]["output"] = "a.csv";
  CHECK(a == b);
  CHECK(a["seed"] == 1);
  CHECK(a["scores"].size() == 20u);
  CHECK(a["potential"] == "analytic");
  CHECK(read_points(ws.path("a.csv")).size() == 20);
}

TEST_CASE("select: support-points medoid of three collinear candidates") {
  cli::Workspace ws("cli-medoid");
  ws.write("cand.csv", "x1\n0\n0.5\n1\n");
  REQUIRE(ws.run("select --method support-points --n 1 --candidates cand.csv --output sel.csv") == 0);
  const PointSet sel = read_points(ws.path("sel.csv"));
  REQUIRE(sel.size() == 1);
  CHECK(sel.matrix()(0, 0) == 0.5);
  const Json prov = read_json(ws, "sel.json");
  CHECK(prov["indices"][0] == 1);
  CHECK(prov["scores"][0].get<double>() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("select: fssf output is disjoint from the fixed design") {
  cli::Workspace ws("cli-fssf-fixed");
  write_random_points(ws.path("train.csv"), 10, 2, 4);
  REQUIRE(ws.run("select --method fssf --n 40 --measure uniform:d=2 --fixed train.csv --seed 2 --output sel.csv") ==
          0);
  const auto fixed = rows_of(read_points(ws.path("train.csv")));
  const PointSet sel = read_points(ws.path("sel.csv"));
  CHECK(sel.size() == 40);
  for (const auto& row : rows_of(sel)) CHECK(fixed.count(row) == 0u);
  CHECK(rows_of(sel).size() == 40u);
}

TEST_CASE("assess: perfect and uniform reports, and field consistency") {
  cli::Workspace ws("cli-assess");
  Rng rng(5);
  Matrix xm(12, 2), xn(8, 2);
  for (Index i = 0; i < xm.size(); ++i) xm(i) = rng.uniform();
  for (Index i = 0; i < xn.size(); ++i) xn(i) = rng.uniform();
  auto f = [](const Matrix& x) {
    Vector y(x.rows());
    for (Index i = 0; i < x.rows(); ++i) y(i) = std::sin(4.0 * x(i, 0)) + x(i, 1) * x(i, 1);
    return y;
  };
  write_points(ws.path("xm.csv"), PointSet(xm));
  write_points(ws.path("xn.csv"), PointSet(xn));
  write_values(ws.path("ym.csv"), f(xm));
  write_values(ws.path("yn.csv"), f(xn));
  write_values(ws.path("pn.csv"), f(xn));
  write_values(ws.path("bad.csv"), f(xn).array() * 0.9 + 0.05);

  const std::string io = "--train xm.csv,ym.csv --test xn.csv,yn.csv ";
  REQUIRE(ws.run("assess " + io + "--pred pn.csv --output perfect.json") == 0);
  const Json perfect = read_json(ws, "perfect.json")["report"];
  CHECK(perfect["q2_hat"] == 1.0);
  CHECK(perfect["q2_star"] == 1.0);

  REQUIRE(ws.run("assess " + io + "--pred bad.csv --uniform-weights --output uniform.json") == 0);
  const Json uni = read_json(ws, "uniform.json")["report"];
  CHECK(uni["q2_star"] == uni["q2_hat"]);

  REQUIRE(ws.run("assess " + io + "--fit-kriging --prime-weights --output fit.json") == 0);
  const Json fit = read_json(ws, "fit.json");
  const Json& r = fit["report"];
  CHECK(r["q2_hat"].get<double>() ==
        doctest::Approx(1.0 - r["ise_uniform"].get<double>() / r["denom_uniform"].get<double>()).epsilon(1e-12));
  CHECK(r["q2_star"].get<double>() ==
        doctest::Approx(1.0 - r["ise_weighted"].get<double>() / r["denom_uniform"].get<double>()).epsilon(1e-12));
  CHECK(r["weights"]["scheme"] == "optimal");
  CHECK(r["weights"]["weights"].size() == 8u);
  CHECK(r["q2_prime_star"].is_number());
  CHECK(fit["model"]["theta"].size() == 2u);
  CHECK(fit["version"].is_string());
  CHECK(fit["config"]["measure"].is_string());

  CHECK(ws.run("assess " + io + "--pred bad.csv --prime-weights") == 2);
  CHECK(ws.run("assess --train xm.csv,ym.csv --test xm.csv,ym.csv --pred ym.csv") == 2);
  CHECK(ws.log().find("error") != std::string::npos);
}

TEST_CASE("split: sizes and partition") {
  cli::Workspace ws("cli-split");
  write_random_points(ws.path("data.csv"), 1000, 2, 6);
  REQUIRE(ws.run("split --data data.csv --ratio 0.2 --method support-points --seed 3") == 0);
  const Table all = read_csv(ws.path("data.csv"));
  const Table train = read_csv(ws.path("train.csv"));
  const Table test = read_csv(ws.path("test.csv"));
  CHECK(test.values.rows() == 200);
  CHECK(train.values.rows() == 800);
  CHECK(train.header == all.header);
  Matrix joined(1000, 2);
  joined << train.values, test.values;
  CHECK(multirows_of(joined) == multirows_of(all.values));

  const Json prov = read_json(ws, "split.json");
  CHECK(prov["test_indices"].size() == 200u);
  CHECK(prov["config"]["n_train"] == 800);
  CHECK(ws.run("split --data data.csv --ratio 1.0") == 2);
  CHECK(ws.run("split --data data.csv --n-test 1000") == 2);
}

TEST_CASE("split: herding beats the median random split in MMD") {
  cli::Workspace ws("cli-split-mmd");
  const Dataset data = synthetic_split_dataset(300, 11);
  write_points(ws.path("data.csv"), data.inputs);
  REQUIRE(ws.run("split --data data.csv --ratio 0.2 --method herding --seed 1") == 0);
  const Json prov = read_json(ws, "split.json");
  std::vector<Index> chosen;
  for (const auto& i : prov["test_indices"]) chosen.push_back(i.get<Index>());
  const Index n = 60;
  REQUIRE(static_cast<Index>(chosen.size()) == n);

  const PointSet x = minmax_normalize(data.inputs);
  const auto k = KernelSpec::matern52_tensor(8, std::pow(double(n), -1.0 / 8.0));
  const Potential mu = Potential::empirical(k, x);
  const double herd = mmd_squared(x.subset(chosen), mu);

  Rng rng(99);
  std::vector<double> random;
  std::vector<Index> perm(300);
  for (int r = 0; r < 100; ++r) {
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(perm);
    random.push_back(mmd_squared(x.subset(std::vector<Index>(perm.begin(), perm.begin() + n)), mu));
  }
  CHECK(herd < sample_quantile(random, 0.5));
}

TEST_CASE("bench: row count and byte-identical reruns") {
  cli::Workspace ws("cli-bench");
  const std::string args = "bench --case f1 --m 30 --seed 3 --mc-size 5000 --n-candidates 1024 ";
  REQUIRE(ws.run(args + "--output a.csv") == 0);
  REQUIRE(ws.run(args + "--output b.csv") == 0);
  CHECK(ws.slurp("a.csv") == ws.slurp("b.csv"));
  std::istringstream lines(ws.slurp("a.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(lines, line);
  CHECK(line == "method,m,n,metric,value,seed");
  while (std::getline(lines, line)) ++rows;
  // 3 methods x 47 test sizes x 3 metrics, plus the Q2_MC and LOO baselines.
  CHECK(rows == 3u * 47u * 3u + 2u);
  CHECK(read_json(ws, "a.json")["summary"]["rows"] == rows);
}

TEST_CASE("exit codes") {
  cli::Workspace ws("cli-exit");
  CHECK(ws.run("select --method random --n 3 --measure uniform:d=2") == 2);
  CHECK(ws.run("select --method fssf --n 3") == 2);
  CHECK(ws.run("select --bogus") == 2);
  CHECK(ws.run("select --method fssf --n 3 --candidates missing.csv") == 4);
  ws.write("bad.csv", "x1,x2\n0.1,0.2\n0.3\n");
  CHECK(ws.run("select --method fssf --n 1 --candidates bad.csv") == 4);
  CHECK(ws.log().find("line 3") != std::string::npos);
  ws.write("text.csv", "x1\nabc\n");
  CHECK(ws.run("select --method support-points --n 1 --candidates text.csv") == 4);
  CHECK(ws.log().find("line 2") != std::string::npos);
  ws.write("out.csv", "x1\n2.0\n0.5\n");
  CHECK(ws.run("select --method fssf --n 1 --candidates out.csv") == 2);
  CHECK(ws.run("bench --case f1 --split") == 2);
}
