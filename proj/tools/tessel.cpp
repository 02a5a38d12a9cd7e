// Command-line front end: select | assess | split | bench.

#include <tessel/bench.hpp>
#include <tessel/csv.hpp>
#include <tessel/serialize.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

namespace {

using namespace tessel;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string json_path_for(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

Json envelope(const std::string& command, const Json& config, std::uint64_t seed) {
  return Json{{"command", command}, {"version", TESSEL_VERSION}, {"seed", seed}, {"config", config}};
}

double default_theta(Index n, Index d) { return std::pow(static_cast<double>(std::max<Index>(n, 1)), -1.0 / d); }

// ---------------------------------------------------------------------------

struct SelectArgs {
  std::string method;
  Index n = 0;
  std::string candidates;
  std::string measure;
  Index n_candidates = 0;
  bool no_vertices = false;
  std::string fixed;
  double theta = 0.0;
  double boundary_factor = 0.0;
  bool exclude_fixed = false;
  std::uint64_t seed = 0;
  std::string output = "selection.csv";
  std::string provenance;
};

void cmd_select(const SelectArgs& a) {
  const Method method = parse_method(a.method);
  if (a.candidates.empty() && a.measure.empty()) {
    throw ValidationError("select needs --candidates or --measure");
  }
  if (a.n < 0) throw ValidationError("--n must be nonnegative");
  std::optional<TargetMeasure> mu;
  if (!a.measure.empty()) mu = TargetMeasure::parse(a.measure);

  PointSet fixed;
  if (!a.fixed.empty()) fixed = read_points(a.fixed);

  // Generated candidates live in the unit cube; FSSF selects there and the
  // result is mapped onto the measure afterwards.
  PointSet cand_u;
  PointSet cand_x;
  PointSet fixed_u = fixed;
  bool vertices = false;
  if (!a.candidates.empty()) {
    cand_x = read_points(a.candidates);
    cand_u = cand_x;
    if (mu) check_dims(mu->dim(), cand_x.dim(), "measure");
  } else {
    if (mu->is_empirical()) throw UnsupportedError("cannot generate candidates for an empirical measure");
    const Index d = mu->dim();
    vertices = mu->is_unit_cube() && !a.no_vertices;
    if (a.n_candidates > 0) {
      cand_u = sobol_sequence(d, a.n_candidates, 1);
      if (vertices) cand_u = PointSet::concat(cand_u, cube_vertices(d));
    } else {
      cand_u = candidate_set(d, a.n, vertices);
    }
    cand_x = mu->is_unit_cube() ? cand_u : iso_transform(cand_u, *mu);
    if (!mu->is_unit_cube() && fixed.size() > 0) fixed_u = iso_transform_inverse(fixed, *mu);
  }
  const Index d = cand_x.dim();
  if (fixed.size() > 0) check_dims(fixed.dim(), d, "fixed design");

  SelectionOptions opts;
  opts.seed = a.seed;
  if (a.boundary_factor > 0) opts.boundary_factor = a.boundary_factor;
  opts.fixed_in_support_sum = !a.exclude_fixed;

  const double theta = a.theta > 0 ? a.theta : default_theta(a.n, d);
  const KernelSpec kernel = KernelSpec::matern52_tensor(d, theta);

  Selection sel;
  Json kernel_json = nullptr;
  std::string potential_mode = "none";
  if (method == Method::Fssf) {
    SelectionState state(method, cand_u, fixed_u, opts);
    sel = select_n(state, a.n);
    sel.points = cand_x.subset(sel.indices);
  } else {
    SelectionState state(method, cand_x, fixed, opts);
    if (method == Method::Herding) {
      const Potential pot =
          mu ? Potential::for_measure(kernel, *mu, cand_x) : Potential::empirical(kernel, cand_x);
      potential_mode = pot.mode() == PotentialMode::Analytic ? "analytic" : "empirical";
      kernel_json = to_json(kernel);
      sel = select_n(state, a.n, &pot);
    } else {
      kernel_json = Json{{"family", "energy"}};
      sel = select_n(state, a.n);
    }
  }

  write_points(a.output, sel.points);

  Json config{{"method", to_string(method)},
              {"n", a.n},
              {"candidates", a.candidates.empty() ? Json(nullptr) : Json(a.candidates)},
              {"measure", mu ? Json(mu->describe()) : Json(nullptr)},
              {"n_candidates", cand_x.size()},
              {"vertices", vertices},
              {"fixed", a.fixed.empty() ? Json(nullptr) : Json(a.fixed)},
              {"boundary_factor", method == Method::Fssf ? Json(opts.boundary_factor.value_or(std::sqrt(2.0) * d))
                                                         : Json(nullptr)},
              {"fixed_in_support_sum", opts.fixed_in_support_sum},
              {"output", a.output}};
  Json j = envelope("select", config, a.seed);
  j["kernel"] = kernel_json;
  j["potential"] = potential_mode;
  Json idx = Json::array();
  for (Index i : sel.indices) idx.push_back(i);
  j["indices"] = idx;
  j["scores"] = to_json(sel.scores);
  write_json(a.provenance.empty() ? json_path_for(a.output) : a.provenance, j);
}

// ---------------------------------------------------------------------------

struct AssessArgs {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::string pred;
  std::string train_pred;
  bool fit_kriging = false;
  std::string measure;
  std::string mu_sample;
  Index mu_sample_size = Index{1} << 13;
  double theta = 0.0;
  bool uniform_weights = false;
  bool prime_weights = false;
  std::uint64_t seed = 0;
  std::string output = "report.json";
};

void cmd_assess(const AssessArgs& a) {
  if (a.train.size() != 2 || a.test.size() != 2) throw ValidationError("--train and --test take X.csv,y.csv");
  if (a.pred.empty() == !a.fit_kriging) throw ValidationError("give exactly one of --pred and --fit-kriging");
  if (a.prime_weights && !a.fit_kriging) {
    throw ValidationError("--prime-weights needs --fit-kriging (the predictor must be evaluable on the measure sample)");
  }

  const PointSet xm = read_points(a.train[0]);
  const Vector ym = read_values(a.train[1]);
  const PointSet xn = read_points(a.test[0]);
  const Vector yn = read_values(a.test[1]);
  check_dims(ym.size(), xm.size(), "training responses");
  check_dims(yn.size(), xn.size(), "test responses");
  check_dims(xn.dim(), xm.dim(), "test inputs");
  const Index d = xm.dim();

  const TargetMeasure mu = a.measure.empty() ? TargetMeasure::unit_cube(d) : TargetMeasure::parse(a.measure);
  check_dims(mu.dim(), d, "measure");

  PointSet sample;
  if (!a.mu_sample.empty()) {
    sample = read_points(a.mu_sample);
  } else if (mu.is_empirical()) {
    sample = mu.empirical_part().atoms;
  } else {
    sample = iso_transform(sobol_sequence(d, a.mu_sample_size, 1), mu);
  }

  std::optional<KrigingModel> model;
  Vector eta_n;
  std::optional<Vector> eta_m;
  if (a.fit_kriging) {
    model = KrigingModel::fit(xm, ym);
    eta_n = model->predict(xn);
    eta_m = model->predict(xm);
  } else {
    eta_n = read_values(a.pred);
    check_dims(eta_n.size(), xn.size(), "test predictions");
    if (!a.train_pred.empty()) {
      eta_m = read_values(a.train_pred);
      check_dims(eta_m->size(), xm.size(), "training predictions");
    }
  }

  const double theta = a.theta > 0 ? a.theta : default_theta(xn.size(), d);
  const KernelSpec kernel = KernelSpec::matern52_tensor(d, theta);

  WeightedTestSet wts;
  bool delta_zero = true;
  std::optional<WeightedTestSet> prime;
  if (a.uniform_weights) {
    wts = uniform_weights(xn);
  } else {
    const ConditionedKernel ck(kernel, xm);
    // Without training predictions the predictor is taken as interpolating.
    const ErrorInterpolant delta = eta_m ? error_interpolant(ck, ym, *eta_m) : ErrorInterpolant();
    delta_zero = delta.is_zero();
    wts = optimal_weights(ck, xn, sample, delta);
    if (a.prime_weights) prime = optimal_weights_prime(ck, xn, sample, model->predictor(), ym.mean());
  }
  const PredictivityReport report = q2_report(yn, eta_n, wts, ym, prime);

  Json config{{"train", a.train},
              {"test", a.test},
              {"pred", a.pred.empty() ? Json(nullptr) : Json(a.pred)},
              {"train_pred", a.train_pred.empty() ? Json(nullptr) : Json(a.train_pred)},
              {"fit_kriging", a.fit_kriging},
              {"measure", mu.describe()},
              {"mu_sample", a.mu_sample.empty() ? Json(nullptr) : Json(a.mu_sample)},
              {"mu_sample_size", sample.size()},
              {"uniform_weights", a.uniform_weights},
              {"prime_weights", a.prime_weights},
              {"output", a.output}};
  Json j = envelope("assess", config, a.seed);
  j["weighting_kernel"] = to_json(kernel);
  j["error_interpolant_zero"] = delta_zero;
  j["report"] = to_json(report);
  if (prime) j["prime_weights"] = to_json(*prime);
  if (model) j["model"] = to_json(*model);
  write_json(a.output, j);
}

// ---------------------------------------------------------------------------

struct SplitArgs {
  std::string data;
  double ratio = 0.0;
  Index n_test = 0;
  std::string method = "herding";
  double theta = 0.0;
  bool no_normalize = false;
  std::uint64_t seed = 0;
  std::string train_out = "train.csv";
  std::string test_out = "test.csv";
  std::string provenance = "split.json";
};

void cmd_split(const SplitArgs& a) {
  const Table table = read_csv(a.data);
  const Index big_n = table.values.rows();
  if (big_n < 2) throw ValidationError("dataset needs at least two rows");
  if ((a.ratio > 0) == (a.n_test > 0)) throw ValidationError("give exactly one of --ratio and --n-test");
  if (a.ratio != 0 && !(a.ratio > 0 && a.ratio < 1)) throw ValidationError("--ratio must lie in (0,1)");
  const Index n = a.n_test > 0 ? a.n_test : static_cast<Index>(std::lround(a.ratio * big_n));
  if (n < 1 || n >= big_n) throw ValidationError("test size must lie in [1, N)");
  const Method method = parse_method(a.method);

  const PointSet raw(table.values);
  const PointSet x = a.no_normalize ? raw : minmax_normalize(raw);
  const Index d = x.dim();
  const double theta = a.theta > 0 ? a.theta : default_theta(n, d);
  const KernelSpec kernel = KernelSpec::matern52_tensor(d, theta);

  SelectionOptions opts;
  opts.seed = a.seed;
  SelectionState state(method, x, PointSet(), opts);
  const Potential pot = Potential::empirical(kernel, x);
  const Selection sel = select_n(state, n, method == Method::Herding ? &pot : nullptr);

  std::vector<bool> in_test(static_cast<std::size_t>(big_n), false);
  for (Index i : sel.indices) in_test[static_cast<std::size_t>(i)] = true;
  std::vector<Index> train;
  for (Index i = 0; i < big_n; ++i) {
    if (!in_test[static_cast<std::size_t>(i)]) train.push_back(i);
  }

  Table train_t{table.header, table.values(train, Eigen::all)};
  Table test_t{table.header, table.values(sel.indices, Eigen::all)};
  write_csv(a.train_out, train_t);
  write_csv(a.test_out, test_t);

  Json config{{"data", a.data},
              {"method", to_string(method)},
              {"ratio", a.ratio > 0 ? Json(a.ratio) : Json(nullptr)},
              {"n_test", n},
              {"n_train", big_n - n},
              {"normalize", !a.no_normalize},
              {"train_out", a.train_out},
              {"test_out", a.test_out}};
  Json j = envelope("split", config, a.seed);
  j["kernel"] = method == Method::Herding ? to_json(kernel) : Json(nullptr);
  Json test_idx = Json::array();
  for (Index i : sel.indices) test_idx.push_back(i);
  Json train_idx = Json::array();
  for (Index i : train) train_idx.push_back(i);
  j["test_indices"] = test_idx;
  j["train_indices"] = train_idx;
  j["scores"] = to_json(sel.scores);
  write_json(a.provenance, j);
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string case_id;
  bool split = false;
  std::string dataset;
  std::string responses;
  std::vector<Index> m;
  std::vector<std::string> methods;
  Index mc_size = 100000;
  Index rcv_reps = 200;
  Index n_candidates = 0;
  Index n_points = 300;
  std::vector<double> ratios;
  bool no_loo = false;
  std::uint64_t seed = 0;
  std::string output = "bench.csv";
  std::string summary;
};

void cmd_bench(const BenchArgs& a) {
  const int modes = !a.case_id.empty() + a.split + !a.dataset.empty();
  if (modes != 1) throw ValidationError("give exactly one of --case, --split and --dataset");

  std::vector<Method> methods;
  for (const auto& s : a.methods) methods.push_back(parse_method(s));
  Json method_names = Json::array();

  BenchResult result;
  Json config;
  if (!a.case_id.empty()) {
    const TestCase tc = TestCase::preset(parse_case(a.case_id));
    Section4Config cfg;
    if (!methods.empty()) cfg.methods = methods;
    cfg.m_values = a.m;
    cfg.mc_size = a.mc_size;
    cfg.loo = !a.no_loo;
    cfg.n_candidates = a.n_candidates;
    for (Method m : cfg.methods) method_names.push_back(to_string(m));
    result = run_section4(tc, cfg, a.seed);
    config = Json{{"mode", "functions"},
                  {"case", to_string(tc.id)},
                  {"m", cfg.m_values.empty() ? tc.m_grid : cfg.m_values},
                  {"n_range", {tc.n_min, tc.n_max}},
                  {"methods", method_names},
                  {"mc_size", cfg.mc_size},
                  {"loo", cfg.loo},
                  {"n_candidates", cfg.n_candidates > 0 ? cfg.n_candidates : tc.n_candidates},
                  {"herding_theta", tc.herding_theta}};
  } else {
    Dataset data;
    if (a.split) {
      data = synthetic_split_dataset(a.n_points, a.seed);
    } else {
      if (a.responses.empty()) throw ValidationError("--dataset needs --responses");
      data.inputs = read_points(a.dataset);
      data.responses = read_values(a.responses);
    }
    SplitConfig cfg;
    if (!methods.empty()) cfg.methods = methods;
    cfg.ratios = a.ratios;
    cfg.repetitions = a.rcv_reps;
    for (Method m : cfg.methods) method_names.push_back(to_string(m));
    result = run_split_study(data, cfg, a.seed);
    config = Json{{"mode", "split"},
                  {"dataset", a.split ? Json("synthetic") : Json(a.dataset)},
                  {"n_points", data.inputs.size()},
                  {"ratios", a.ratios.empty() ? Json("default") : Json(a.ratios)},
                  {"methods", method_names},
                  {"rcv_reps", cfg.repetitions}};
  }

  {
    std::ofstream out(a.output, std::ios::binary);
    if (!out) throw IoError("cannot open '" + a.output + "' for writing");
    write_bench_csv(out, result);
  }
  config["output"] = a.output;
  Json j = envelope("bench", config, a.seed);
  j["summary"] = bench_summary(result);
  write_json(a.summary.empty() ? json_path_for(a.output) : a.summary, j);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-set selection and weighted predictivity assessment"};
  app.set_version_flag("--version", std::string(TESSEL_VERSION));
  app.require_subcommand(1);

  SelectArgs sa;
  auto* sel = app.add_subcommand("select", "Select an ordered test set from candidates");
  sel->add_option("--method", sa.method, "fssf | support-points | herding")->required();
  sel->add_option("--n", sa.n, "Number of points to select")->required();
  sel->add_option("--candidates", sa.candidates, "Candidate CSV (header x1..xd)");
  sel->add_option("--measure", sa.measure, "uniform:d=2 | normal:d=2 | product:U(0,1),N(0,1),...");
  sel->add_option("--n-candidates", sa.n_candidates, "Generated Sobol candidate count (default 1000 d + 2 n)");
  sel->add_flag("--no-vertices", sa.no_vertices, "Do not append cube vertices to generated candidates");
  sel->add_option("--fixed", sa.fixed, "Existing design CSV treated as already selected");
  sel->add_option("--theta", sa.theta, "Herding lengthscale (default n^(-1/d))");
  sel->add_option("--boundary-factor", sa.boundary_factor, "FSSF-fr boundary multiplier (default sqrt(2) d)");
  sel->add_flag("--exclude-fixed-from-sum", sa.exclude_fixed, "Support points: ignore fixed points in the sum");
  sel->add_option("--seed", sa.seed, "Random seed");
  sel->add_option("--output", sa.output, "Selected points CSV");
  sel->add_option("--provenance", sa.provenance, "Provenance JSON (default: output with .json)");

  AssessArgs aa;
  auto* ass = app.add_subcommand("assess", "Compute weighted and unweighted Q2 estimates");
  ass->add_option("--train", aa.train, "X_m.csv,y_m.csv")->required()->expected(2)->delimiter(',');
  ass->add_option("--test", aa.test, "X_n.csv,y_n.csv")->required()->expected(2)->delimiter(',');
  ass->add_option("--pred", aa.pred, "External predictions at the test points");
  ass->add_option("--train-pred", aa.train_pred, "External predictions at the training points");
  ass->add_flag("--fit-kriging", aa.fit_kriging, "Fit the built-in ordinary kriging model");
  ass->add_option("--measure", aa.measure, "Target measure (default uniform on the unit cube)");
  ass->add_option("--mu-sample", aa.mu_sample, "Quadrature sample of the measure (CSV)");
  ass->add_option("--mu-sample-size", aa.mu_sample_size, "Generated quadrature sample size");
  ass->add_option("--theta", aa.theta, "Weighting-kernel lengthscale (default n^(-1/d))");
  ass->add_flag("--uniform-weights", aa.uniform_weights, "Use weights 1/n");
  ass->add_flag("--prime-weights", aa.prime_weights, "Also weight the denominator of Q2'");
  ass->add_option("--seed", aa.seed, "Random seed (recorded)");
  ass->add_option("--output", aa.output, "Report JSON");

  SplitArgs pa;
  auto* spl = app.add_subcommand("split", "Split a dataset into training and test sets");
  spl->add_option("--data", pa.data, "Input CSV (all columns are inputs)")->required();
  spl->add_option("--ratio", pa.ratio, "Test fraction in (0,1)");
  spl->add_option("--n-test", pa.n_test, "Test size");
  spl->add_option("--method", pa.method, "herding | support-points | fssf");
  spl->add_option("--theta", pa.theta, "Herding lengthscale (default n^(-1/d))");
  spl->add_flag("--no-normalize", pa.no_normalize, "Skip min-max normalization");
  spl->add_option("--seed", pa.seed, "Random seed");
  spl->add_option("--train-out", pa.train_out, "Training rows CSV");
  spl->add_option("--test-out", pa.test_out, "Test rows CSV");
  spl->add_option("--provenance", pa.provenance, "Provenance JSON");

  BenchArgs ba;
  auto* ben = app.add_subcommand("bench", "Run the analytic-function benchmark or the split study");
  ben->add_option("--case", ba.case_id, "f1 | f2 | gsobol");
  ben->add_flag("--split", ba.split, "Split study on the synthetic dataset");
  ben->add_option("--dataset", ba.dataset, "Split study on an input CSV");
  ben->add_option("--responses", ba.responses, "Responses CSV for --dataset");
  ben->add_option("--m", ba.m, "Training sizes (default: preset grid)");
  ben->add_option("--methods", ba.methods, "Selection methods")->delimiter(',');
  ben->add_option("--mc-size", ba.mc_size, "Monte-Carlo sample size for Q2_MC");
  ben->add_option("--rcv-reps", ba.rcv_reps, "Random cross-validation repetitions");
  ben->add_option("--n-candidates", ba.n_candidates, "Candidate count override");
  ben->add_option("--n-points", ba.n_points, "Synthetic dataset size");
  ben->add_option("--ratios", ba.ratios, "Split ratios")->delimiter(',');
  ben->add_flag("--no-loo", ba.no_loo, "Skip leave-one-out");
  ben->add_option("--seed", ba.seed, "Random seed");
  ben->add_option("--output", ba.output, "Long-format CSV");
  ben->add_option("--summary", ba.summary, "Summary JSON (default: output with .json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (sel->parsed()) cmd_select(sa);
    if (ass->parsed()) cmd_assess(aa);
    if (spl->parsed()) cmd_split(pa);
    if (ben->parsed()) cmd_bench(ba);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
