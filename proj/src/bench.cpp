#include <tessel/bench.hpp>
#include <tessel/parallel.hpp>

#include <algorithm>
#include <numeric>

namespace tessel {

std::string to_string(CaseId id) {
  switch (id) {
    case CaseId::F1: return "f1";
    case CaseId::F2: return "f2";
    case CaseId::GSobol: return "gsobol";
  }
  return "unknown";
}

CaseId parse_case(const std::string& text) {
  if (text == "f1") return CaseId::F1;
  if (text == "f2") return CaseId::F2;
  if (text == "gsobol" || text == "f3") return CaseId::GSobol;
  throw ValidationError("unknown test case '" + text + "'");
}

namespace {

template <typename F>
TestFunction rowwise(F f) {
  return [f](const PointSet& x) {
    Vector v(x.size());
    for (Index i = 0; i < x.size(); ++i) v(i) = f(x.point(i));
    return v;
  };
}

}  // namespace

TestFunction test_function(CaseId id) {
  switch (id) {
    case CaseId::F1: return rowwise([](const auto& x) { return f1(x); });
    case CaseId::F2: return rowwise([](const auto& x) { return f2(x); });
    case CaseId::GSobol: return rowwise([](const auto& x) { return gsobol(x); });
  }
  throw ValidationError("unknown test case");
}

TestCase TestCase::preset(CaseId id) {
  TestCase tc;
  tc.id = id;
  switch (id) {
    case CaseId::F1:
      tc.dim = 2;
      tc.mu = TargetMeasure::unit_cube(2);
      tc.m_grid = {5, 15, 30};
      tc.herding_theta = 0.2;
      break;
    case CaseId::F2:
      tc.dim = 2;
      tc.mu = TargetMeasure::standard_normal(2);
      tc.m_grid = {8, 15, 30};
      tc.herding_theta = 0.2;
      tc.vertices = false;
      break;
    case CaseId::GSobol:
      tc.dim = 8;
      tc.mu = TargetMeasure::unit_cube(8);
      tc.m_grid = {15, 30, 100};
      tc.herding_theta = 0.7;
      tc.n_candidates = Index{1} << 15;
      break;
  }
  return tc;
}

double q2_mc(const TestFunction& f, const PointFunction& model, const TargetMeasure& mu, Index sample_size,
             std::uint64_t seed) {
  if (sample_size < 1000) throw ValidationError("Monte-Carlo Q2 needs at least 1000 points");
  Rng rng(seed);
  const PointSet sample = mu.sample(sample_size, rng);
  constexpr Index kBlock = 8192;
  Vector fv(sample_size), eta(sample_size);
  for (Index start = 0; start < sample_size; start += kBlock) {
    const Index len = std::min(kBlock, sample_size - start);
    const PointSet block(Matrix(sample.matrix().middleRows(start, len)));
    fv.segment(start, len) = f(block);
    eta.segment(start, len) = model(block);
  }
  const double denom = (fv.array() - fv.mean()).square().sum();
  if (!(denom > 0)) throw DegenerateError("test function is constant on the sample");
  return 1.0 - (fv - eta).squaredNorm() / denom;
}

double BenchResult::value(const std::string& method, Index m, Index n, const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.method == method && r.m == m && r.n == n && r.metric == metric) return r.value;
  }
  throw ValidationError("no bench row for " + method + "/" + metric);
}

BenchResult run_section4(const TestCase& tc, const Section4Config& config, std::uint64_t seed) {
  const TestFunction f = test_function(tc.id);
  const std::vector<Index> m_values = config.m_values.empty() ? tc.m_grid : config.m_values;
  const Index n_cand = config.n_candidates > 0 ? config.n_candidates : tc.n_candidates;
  const bool uniform = tc.mu.is_unit_cube();
  const Index d = tc.dim;

  // Unit-cube candidates for FSSF; their image under the transform for the
  // MMD methods. The Sobol part alone serves as the quadrature sample of mu.
  const PointSet sobol_u = sobol_sequence(d, n_cand, 1);
  const PointSet cand_u = tc.vertices ? PointSet::concat(sobol_u, cube_vertices(d)) : sobol_u;
  const PointSet cand_x = uniform ? cand_u : iso_transform(cand_u, tc.mu);
  const PointSet mu_sample = uniform ? sobol_u : iso_transform(sobol_u, tc.mu);

  const KernelSpec herd_kernel = KernelSpec::matern52_tensor(d, tc.herding_theta);
  const Potential potential = Potential::analytic(herd_kernel, tc.mu);

  BenchResult out;
  const Rng root(seed);
  for (Index m : m_values) {
    const Rng cell = root.split(static_cast<std::uint64_t>(m));
    const PointSet train_u = maximin_lhs(d, m, cell.split(0)());
    const PointSet train_x = uniform ? train_u : iso_transform(train_u, tc.mu);
    const Vector y_m = f(train_x);
    const KrigingModel model = KrigingModel::fit(train_x, y_m, config.fit);

    out.rows.push_back({"baseline", m, 0, "q2_mc", q2_mc(f, model.predictor(), tc.mu, config.mc_size, cell.split(1)()), seed});
    if (config.loo) out.rows.push_back({"baseline", m, 0, "q2_loo", loo_q2(train_x, y_m, config.fit), seed});

    const ConditionedKernel ck(herd_kernel, train_x);
    const ErrorInterpolant delta = error_interpolant(ck, y_m, model.predict(train_x));
    const FourthMomentKernel kb = kbar(ck, delta.as_function());

    for (Method method : config.methods) {
      SelectionOptions opts;
      opts.seed = cell.split(2)();
      PointSet test;
      if (method == Method::Fssf) {
        SelectionState state(method, cand_u, train_u, opts);
        test = cand_x.subset(select_n(state, tc.n_max).indices);
      } else {
        SelectionState state(method, cand_x, train_x, opts);
        test = select_n(state, tc.n_max, &potential).points;
      }
      const Vector y_n = f(test);
      const Vector eta_n = model.predict(test);
      const NestedWeights nested(kb, test, mu_sample);
      for (Index n = tc.n_min; n <= tc.n_max; ++n) {
        const WeightedTestSet w = nested.leading(n);
        const PredictivityReport rep = q2_report(y_n.head(n), eta_n.head(n), w);
        const std::string name = to_string(method);
        out.rows.push_back({name, m, n, "q2_hat", rep.q2_hat, seed});
        out.rows.push_back({name, m, n, "q2_star", rep.q2_star, seed});
        out.rows.push_back({name, m, n, "weight_sum", w.weights.sum(), seed});
      }
    }
  }
  return out;
}

Dataset synthetic_split_dataset(Index n_points, std::uint64_t seed) {
  if (n_points < 1) throw ValidationError("dataset size must be positive");
  std::vector<Marginal> marginals;
  for (int i = 0; i < 8; ++i) {
    if (i % 2 == 0) {
      marginals.emplace_back(NormalMarginal{0.0, 1.0});
    } else {
      marginals.emplace_back(LogNormalMarginal{0.0, 0.5});
    }
  }
  const TargetMeasure mu = TargetMeasure::product(marginals);
  Rng rng(seed);
  Dataset data;
  data.inputs = mu.sample(n_points, rng);
  data.responses = test_function(CaseId::GSobol)(iso_transform_inverse(data.inputs, mu));
  return data;
}

PointSet minmax_normalize(const PointSet& x) {
  Matrix z = x.matrix();
  for (Index j = 0; j < z.cols(); ++j) {
    const double lo = z.col(j).minCoeff();
    const double hi = z.col(j).maxCoeff();
    if (hi > lo) {
      z.col(j) = (z.col(j).array() - lo) / (hi - lo);
    } else {
      z.col(j).setConstant(0.5);
    }
  }
  return PointSet(std::move(z));
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("spearman needs two equal samples of size >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const Eigen::Map<const Vector> x(ra.data(), static_cast<Index>(ra.size()));
  const Eigen::Map<const Vector> y(rb.data(), static_cast<Index>(rb.size()));
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  const double denom = xc.norm() * yc.norm();
  if (!(denom > 0)) throw DegenerateError("spearman correlation of a constant sample");
  return xc.dot(yc) / denom;
}

namespace {

// Ordinary kriging with lengthscales frozen: reuses one gram matrix of the
// whole dataset, so a split costs one m x m factorization.
struct FrozenKriging {
  const Matrix& k;
  const Vector& y;

  struct Fit {
    Vector eta_test;
    Vector eta_train;
  };

  Fit operator()(const std::vector<Index>& train, const std::vector<Index>& test) const {
    const auto m = static_cast<Index>(train.size());
    const Matrix km = k(train, train);
    const JitteredCholesky chol = factorize_with_jitter(km);
    const Vector ym = y(train);
    const Vector ri_one = chol.llt.solve(Vector::Ones(m));
    const Vector ri_y = chol.llt.solve(ym);
    const double beta = ri_y.sum() / ri_one.sum();
    const Vector dual = ri_y - beta * ri_one;
    Fit out;
    out.eta_test = (k(test, train) * dual).array() + beta;
    out.eta_train = (km * dual).array() + beta;
    return out;
  }
};

std::vector<Index> complement(Index n, const std::vector<Index>& taken) {
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Index i : taken) used[static_cast<std::size_t>(i)] = true;
  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i) {
    if (!used[static_cast<std::size_t>(i)]) rest.push_back(i);
  }
  return rest;
}

std::vector<double> default_ratios() {
  std::vector<double> r;
  for (int k = 0; k <= 16; ++k) r.push_back((10.0 + 5.0 * k) / 100.0);
  return r;
}

}  // namespace

BenchResult run_split_study(const Dataset& data, const SplitConfig& config, std::uint64_t seed) {
  const Index big_n = data.inputs.size();
  if (big_n < 20) throw ValidationError("split study needs at least 20 points");
  check_dims(data.responses.size(), big_n, "dataset responses");
  if (config.repetitions < 1) throw ValidationError("RCV needs at least one repetition");
  const std::vector<double> ratios = config.ratios.empty() ? default_ratios() : config.ratios;
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw ValidationError("split ratio must lie in (0,1)");
  }

  const PointSet x = minmax_normalize(data.inputs);
  const Vector& y = data.responses;
  const Index d = x.dim();
  const KrigingModel full = KrigingModel::fit(x, y, config.fit);
  const Matrix k_full = gram(full.kernel(), x);
  const FrozenKriging krige{k_full, y};

  BenchResult out;
  const Rng root(seed);

  std::vector<Index> sp_order;
  for (Method method : config.methods) {
    if (method != Method::SupportPoints) continue;
    Index n_max = 0;
    for (double r : ratios) n_max = std::max(n_max, static_cast<Index>(std::lround(r * big_n)));
    SelectionState state(Method::SupportPoints, x);
    sp_order = select_n(state, std::min(n_max, big_n - 1)).indices;
  }

  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const Index n = static_cast<Index>(std::lround(ratios[k] * big_n));
    const Index m = big_n - n;
    if (m < 3 || n < 2) {
      out.warnings.push_back("ratio " + std::to_string(ratios[k]) + " skipped: m = " + std::to_string(m) +
                             ", n = " + std::to_string(n));
      continue;
    }
    const KernelSpec wkernel = KernelSpec::matern52_tensor(d, std::pow(static_cast<double>(n), -1.0 / d));

    for (Method method : config.methods) {
      const std::string name = to_string(method);
      std::vector<Index> test;
      if (method == Method::SupportPoints) {
        test.assign(sp_order.begin(), sp_order.begin() + n);
      } else {
        SelectionOptions opts;
        opts.seed = root.split(2)();
        SelectionState state(method, x, PointSet(), opts);
        const Potential pot = Potential::empirical(wkernel, x);
        test = select_n(state, n, &pot).indices;
      }
      std::vector<Index> train = complement(big_n, test);
      try {
        const auto fit = krige(train, test);
        const PointSet xm = x.subset(train);
        const PointSet xn = x.subset(test);
        const ConditionedKernel ck(wkernel, xm);
        const ErrorInterpolant delta = error_interpolant(ck, y(train), fit.eta_train);
        const WeightedTestSet w = optimal_weights(ck, xn, x, delta);
        const PredictivityReport rep = q2_report(y(test), fit.eta_test, w);
        out.rows.push_back({name, m, n, "q2_hat", rep.q2_hat, seed});
        out.rows.push_back({name, m, n, "q2_star", rep.q2_star, seed});
        out.rows.push_back({name, m, n, "weight_sum", w.weights.sum(), seed});
      } catch (const NumericalError& e) {
        out.warnings.push_back(name + " at n = " + std::to_string(n) + ": " + e.what());
      }
    }

    std::vector<double> q2(static_cast<std::size_t>(config.repetitions));
    parallel_for(config.repetitions, [&](Index rep) {
      Rng rng = root.split(1000000ULL * (k + 1) + static_cast<std::uint64_t>(rep));
      std::vector<Index> perm(static_cast<std::size_t>(big_n));
      std::iota(perm.begin(), perm.end(), Index{0});
      rng.shuffle(perm);
      std::vector<Index> test(perm.begin(), perm.begin() + n);
      std::sort(test.begin(), test.end());
      const std::vector<Index> train = complement(big_n, test);
      const auto fit = krige(train, test);
      const Vector yt = y(test);
      const double denom = (yt.array() - yt.mean()).square().sum();
      q2[static_cast<std::size_t>(rep)] = 1.0 - (yt - fit.eta_test).squaredNorm() / denom;
    }, 1);
    const std::pair<const char*, double> levels[] = {
        {"q05", 0.05}, {"q25", 0.25}, {"q50", 0.5}, {"q75", 0.75}, {"q95", 0.95}};
    for (const auto& [metric, p] : levels) out.rows.push_back({"rcv", m, n, metric, sample_quantile(q2, p), seed});
    out.rows.push_back({"rcv", m, n, "mean", std::accumulate(q2.begin(), q2.end(), 0.0) / q2.size(), seed});
  }
  return out;
}

}  // namespace tessel
