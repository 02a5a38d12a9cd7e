#include <tessel/format.hpp>
#include <tessel/measures.hpp>
#include <tessel/special.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <regex>

namespace tessel {

// ---------------------------------------------------------------------------
// PointSet

PointSet::PointSet(Matrix points) : points_(std::move(points)) {
  if (!points_.allFinite()) throw DomainError("point set contains non-finite coordinates");
}

PointSet PointSet::subset(std::span<const Index> rows) const {
  Matrix out(static_cast<Index>(rows.size()), dim());
  for (Index i = 0; i < out.rows(); ++i) {
    const Index r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= size()) throw ValidationError("subset index out of range");
    out.row(i) = points_.row(r);
  }
  return PointSet(std::move(out));
}

PointSet PointSet::concat(const PointSet& a, const PointSet& b) {
  if (a.size() == 0 && a.dim() == 0) return b;
  if (b.size() == 0 && b.dim() == 0) return a;
  check_dims(a.dim(), b.dim(), "concat");
  Matrix out(a.size() + b.size(), a.dim());
  out.topRows(a.size()) = a.matrix();
  out.bottomRows(b.size()) = b.matrix();
  return PointSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Marginals

double quantile(const Marginal& m, double u) {
  return std::visit(
      [u](const auto& mg) -> double {
        using T = std::decay_t<decltype(mg)>;
        if constexpr (std::is_same_v<T, UniformMarginal>) {
          return mg.lower + u * (mg.upper - mg.lower);
        } else if constexpr (std::is_same_v<T, NormalMarginal>) {
          return mg.mean + mg.sd * normal_quantile(u);
        } else {
          return std::exp(mg.mu + mg.sigma * normal_quantile(u));
        }
      },
      m);
}

double cdf(const Marginal& m, double x) {
  return std::visit(
      [x](const auto& mg) -> double {
        using T = std::decay_t<decltype(mg)>;
        if constexpr (std::is_same_v<T, UniformMarginal>) {
          return std::clamp((x - mg.lower) / (mg.upper - mg.lower), 0.0, 1.0);
        } else if constexpr (std::is_same_v<T, NormalMarginal>) {
          return normal_cdf((x - mg.mean) / mg.sd);
        } else {
          if (x <= 0) return 0.0;
          return normal_cdf((std::log(x) - mg.mu) / mg.sigma);
        }
      },
      m);
}

std::string describe(const Marginal& m) {
  return std::visit(
      [](const auto& mg) -> std::string {
        using T = std::decay_t<decltype(mg)>;
        if constexpr (std::is_same_v<T, UniformMarginal>) {
          return "U(" + format_double(mg.lower) + "," + format_double(mg.upper) + ")";
        } else if constexpr (std::is_same_v<T, NormalMarginal>) {
          return "N(" + format_double(mg.mean) + "," + format_double(mg.sd) + ")";
        } else {
          return "LN(" + format_double(mg.mu) + "," + format_double(mg.sigma) + ")";
        }
      },
      m);
}

namespace {

void validate(const Marginal& m) {
  std::visit(
      [](const auto& mg) {
        using T = std::decay_t<decltype(mg)>;
        if constexpr (std::is_same_v<T, UniformMarginal>) {
          if (!(mg.lower < mg.upper)) throw ValidationError("uniform marginal needs a < b");
        } else if constexpr (std::is_same_v<T, NormalMarginal>) {
          if (!(mg.sd > 0)) throw ValidationError("normal marginal needs sd > 0");
        } else {
          if (!(mg.sigma > 0)) throw ValidationError("lognormal marginal needs sigma > 0");
        }
      },
      m);
}

}  // namespace

// ---------------------------------------------------------------------------
// TargetMeasure

TargetMeasure::TargetMeasure() : kind_(UnitCube{0}) {}

TargetMeasure TargetMeasure::unit_cube(Index dim) {
  if (dim < 1) throw ValidationError("measure dimension must be >= 1");
  TargetMeasure mu;
  mu.kind_ = UnitCube{dim};
  return mu;
}

TargetMeasure TargetMeasure::product(std::vector<Marginal> marginals) {
  if (marginals.empty()) throw ValidationError("product measure needs at least one marginal");
  for (const auto& m : marginals) validate(m);
  TargetMeasure mu;
  mu.kind_ = Product{std::move(marginals)};
  return mu;
}

TargetMeasure TargetMeasure::standard_normal(Index dim) {
  if (dim < 1) throw ValidationError("measure dimension must be >= 1");
  return product(std::vector<Marginal>(static_cast<std::size_t>(dim), NormalMarginal{}));
}

TargetMeasure TargetMeasure::empirical(PointSet atoms, Vector weights) {
  if (atoms.size() == 0) throw ValidationError("empirical measure needs at least one atom");
  if (weights.size() != 0) {
    check_dims(weights.size(), atoms.size(), "empirical weights");
    if ((weights.array() < 0).any()) throw ValidationError("empirical weights must be nonnegative");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
      throw ValidationError("empirical weights must sum to 1");
  }
  TargetMeasure mu;
  mu.kind_ = Empirical{std::move(atoms), std::move(weights)};
  return mu;
}

TargetMeasure TargetMeasure::parse(const std::string& text) {
  static const std::regex cube_re(R"(^\s*(uniform|normal)\s*:\s*d\s*=\s*(\d+)\s*$)");
  static const std::regex product_re(R"(^\s*product\s*:(.*)$)");
  static const std::regex marginal_re(
      R"(\s*(U|N|LN)\(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)\s*(,|$))");
  std::smatch match;
  if (std::regex_match(text, match, cube_re)) {
    const Index d = std::stol(match[2].str());
    return match[1] == "uniform" ? unit_cube(d) : standard_normal(d);
  }
  if (std::regex_match(text, match, product_re)) {
    std::string rest = match[1].str();
    std::vector<Marginal> marginals;
    std::smatch m;
    while (!rest.empty() && std::regex_search(rest, m, marginal_re) && m.position(0) == 0) {
      const double a = std::stod(m[2].str());
      const double b = std::stod(m[3].str());
      if (m[1] == "U") {
        marginals.emplace_back(UniformMarginal{a, b});
      } else if (m[1] == "N") {
        marginals.emplace_back(NormalMarginal{a, b});
      } else {
        marginals.emplace_back(LogNormalMarginal{a, b});
      }
      rest = m.suffix().str();
    }
    if (!rest.empty() || marginals.empty())
      throw ValidationError("cannot parse product measure '" + text + "'");
    return product(std::move(marginals));
  }
  throw ValidationError("unknown measure specification '" + text + "'");
}

Index TargetMeasure::dim() const {
  return std::visit(
      [](const auto& k) -> Index {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, UnitCube>) {
          return k.dim;
        } else if constexpr (std::is_same_v<T, Product>) {
          return static_cast<Index>(k.marginals.size());
        } else {
          return k.atoms.dim();
        }
      },
      kind_);
}

std::string TargetMeasure::describe() const {
  if (const auto* cube = std::get_if<UnitCube>(&kind_)) {
    return "uniform:d=" + std::to_string(cube->dim);
  }
  if (const auto* prod = std::get_if<Product>(&kind_)) {
    const bool all_std_normal = std::all_of(prod->marginals.begin(), prod->marginals.end(), [](const Marginal& m) {
      const auto* n = std::get_if<NormalMarginal>(&m);
      return n && n->mean == 0.0 && n->sd == 1.0;
    });
    if (all_std_normal) return "normal:d=" + std::to_string(prod->marginals.size());
    std::string out = "product:";
    for (std::size_t i = 0; i < prod->marginals.size(); ++i) {
      if (i) out += ",";
      out += tessel::describe(prod->marginals[i]);
    }
    return out;
  }
  return "empirical:n=" + std::to_string(std::get<Empirical>(kind_).atoms.size());
}

std::vector<Marginal> TargetMeasure::marginals() const {
  if (const auto* cube = std::get_if<UnitCube>(&kind_)) {
    return std::vector<Marginal>(static_cast<std::size_t>(cube->dim), UniformMarginal{});
  }
  if (const auto* prod = std::get_if<Product>(&kind_)) return prod->marginals;
  throw UnsupportedError("empirical measure has no marginal description");
}

PointSet TargetMeasure::sample(Index n, Rng& rng) const {
  if (const auto* emp = std::get_if<Empirical>(&kind_)) {
    Matrix out(n, emp->atoms.dim());
    Vector cumulative;
    if (emp->weights.size()) {
      cumulative.resize(emp->weights.size());
      std::partial_sum(emp->weights.begin(), emp->weights.end(), cumulative.begin());
    }
    for (Index i = 0; i < n; ++i) {
      Index k;
      if (cumulative.size()) {
        const double u = rng.uniform() * cumulative(cumulative.size() - 1);
        k = std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
        k = std::min(k, emp->atoms.size() - 1);
      } else {
        k = rng.index(emp->atoms.size());
      }
      out.row(i) = emp->atoms.point(k);
    }
    return PointSet(std::move(out));
  }
  const auto margs = marginals();
  Matrix out(n, dim());
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < out.cols(); ++j) {
      out(i, j) = quantile(margs[static_cast<std::size_t>(j)], rng.uniform_open());
    }
  }
  return PointSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Sobol

namespace {

struct SobolRow {
  int degree;
  std::uint32_t poly;
  std::array<std::uint32_t, 9> m;
};

constexpr SobolRow kSobolTable[] = {
#include "sobol_table.inc"
};
static_assert(std::size(kSobolTable) == kMaxSobolDimension);

constexpr int kSobolBits = 32;

std::array<std::uint32_t, kSobolBits> direction_numbers(Index dim) {
  const SobolRow& row = kSobolTable[dim];
  std::array<std::uint64_t, kSobolBits> m{};
  if (row.degree == 0) {
    m.fill(1);
  } else {
    const int s = row.degree;
    for (int k = 0; k < s; ++k) m[static_cast<std::size_t>(k)] = row.m[static_cast<std::size_t>(k)];
    for (int k = s; k < kSobolBits; ++k) {
      std::uint64_t v = m[static_cast<std::size_t>(k - s)];
      std::uint64_t pow2 = 1;
      for (int j = 0; j < s; ++j) {
        pow2 <<= 1;
        if ((row.poly >> (s - 1 - j)) & 1u) v ^= pow2 * m[static_cast<std::size_t>(k - j - 1)];
      }
      m[static_cast<std::size_t>(k)] = v;
    }
  }
  std::array<std::uint32_t, kSobolBits> out{};
  for (int k = 0; k < kSobolBits; ++k) {
    out[static_cast<std::size_t>(k)] =
        static_cast<std::uint32_t>(m[static_cast<std::size_t>(k)] << (kSobolBits - 1 - k));
  }
  return out;
}

}  // namespace

PointSet sobol_sequence(Index dim, Index n, std::uint64_t skip) {
  if (dim < 1 || dim > kMaxSobolDimension) {
    throw UnsupportedError("Sobol dimension " + std::to_string(dim) + " outside [1, " +
                           std::to_string(kMaxSobolDimension) + "]");
  }
  if (n < 1) throw ValidationError("Sobol count must be >= 1");
  if (skip + static_cast<std::uint64_t>(n) > (std::uint64_t{1} << kSobolBits)) {
    throw ValidationError("Sobol index range exceeds 2^32 points");
  }
  Matrix out(n, dim);
  for (Index j = 0; j < dim; ++j) {
    const auto v = direction_numbers(j);
    std::uint64_t i = skip;
    std::uint64_t gray = i ^ (i >> 1);
    std::uint32_t x = 0;
    for (int b = 0; b < kSobolBits; ++b) {
      if ((gray >> b) & 1u) x ^= v[static_cast<std::size_t>(b)];
    }
    for (Index r = 0; r < n; ++r) {
      out(r, j) = static_cast<double>(x) * 0x1.0p-32;
      ++i;
      x ^= v[static_cast<std::size_t>(std::countr_zero(i))];
    }
  }
  return PointSet(std::move(out));
}

PointSet cube_vertices(Index dim) {
  if (dim < 1 || dim > 20) throw ValidationError("2^d vertices limited to 1 <= d <= 20");
  const Index count = Index{1} << dim;
  Matrix v(count, dim);
  for (Index k = 0; k < count; ++k) {
    for (Index j = 0; j < dim; ++j) v(k, j) = static_cast<double>((k >> j) & 1);
  }
  return PointSet(std::move(v));
}

PointSet candidate_set(Index dim, Index n_target, bool include_vertices) {
  if (dim < 1) throw ValidationError("candidate dimension must be >= 1");
  if (n_target < 0) throw ValidationError("target size must be nonnegative");
  if (include_vertices && dim > 20) throw ValidationError("2^d vertices limited to d <= 20");
  const Index n_sobol = 1000 * dim + 2 * n_target;
  const Index n_vertices = include_vertices ? (Index{1} << dim) : 0;
  if (n_sobol + n_vertices > (Index{1} << 31)) throw ValidationError("candidate set too large");

  PointSet sobol = sobol_sequence(dim, n_sobol, 1);
  if (!include_vertices) return sobol;
  return PointSet::concat(sobol, cube_vertices(dim));
}

// ---------------------------------------------------------------------------
// Transforms

bool in_unit_cube(const PointSet& x) {
  return x.size() == 0 || ((x.matrix().array() >= 0.0).all() && (x.matrix().array() <= 1.0).all());
}

PointSet iso_transform(const PointSet& u, const TargetMeasure& mu) {
  if (mu.is_empirical()) throw UnsupportedError("iso_transform needs a product measure");
  check_dims(u.dim(), mu.dim(), "iso_transform");
  if (!in_unit_cube(u)) throw DomainError("iso_transform input outside [0,1]^d");
  const auto margs = mu.marginals();
  Matrix out(u.size(), u.dim());
  for (Index i = 0; i < u.size(); ++i) {
    for (Index j = 0; j < u.dim(); ++j) {
      const double x = quantile(margs[static_cast<std::size_t>(j)], u.matrix()(i, j));
      if (!std::isfinite(x)) {
        throw DomainError("iso_transform: coordinate " + format_double(u.matrix()(i, j)) +
                          " maps outside the support");
      }
      out(i, j) = x;
    }
  }
  return PointSet(std::move(out));
}

PointSet iso_transform_inverse(const PointSet& x, const TargetMeasure& mu) {
  if (mu.is_empirical()) throw UnsupportedError("iso_transform_inverse needs a product measure");
  check_dims(x.dim(), mu.dim(), "iso_transform_inverse");
  const auto margs = mu.marginals();
  Matrix out(x.size(), x.dim());
  for (Index i = 0; i < x.size(); ++i) {
    for (Index j = 0; j < x.dim(); ++j) out(i, j) = cdf(margs[static_cast<std::size_t>(j)], x.matrix()(i, j));
  }
  return PointSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Maximin LHS

double min_pairwise_distance(const PointSet& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < x.size(); ++i) {
    for (Index j = i + 1; j < x.size(); ++j) {
      best = std::min(best, (x.point(i) - x.point(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

PointSet latin_hypercube(Index dim, Index m, Rng& rng) {
  if (dim < 1) throw ValidationError("LHS dimension must be >= 1");
  if (m < 1) throw ValidationError("LHS size must be >= 1");
  Matrix x(m, dim);
  std::vector<Index> perm(static_cast<std::size_t>(m));
  for (Index j = 0; j < dim; ++j) {
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(perm);
    for (Index i = 0; i < m; ++i) {
      x(i, j) = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + rng.uniform_open()) /
                static_cast<double>(m);
    }
  }
  return PointSet(std::move(x));
}

PointSet maximin_lhs(Index dim, Index m, std::uint64_t seed) {
  if (m < 2) throw ValidationError("LHS size must be >= 2");
  Rng rng(seed);
  Matrix x = latin_hypercube(dim, m, rng).matrix();

  // Squared distances; only rows i and k change under a swap in one column.
  Matrix d2(m, m);
  for (Index i = 0; i < m; ++i) {
    d2(i, i) = std::numeric_limits<double>::infinity();
    for (Index l = i + 1; l < m; ++l) d2(i, l) = d2(l, i) = (x.row(i) - x.row(l)).squaredNorm();
  }
  double current = d2.minCoeff();

  Vector row_i(m), row_k(m);
  const Index proposals = 10 * m * m;
  for (Index p = 0; p < proposals; ++p) {
    const Index col = rng.index(dim);
    const Index i = rng.index(m);
    Index k = rng.index(m - 1);
    if (k >= i) ++k;
    const double xi = x(i, col), xk = x(k, col);
    for (Index l = 0; l < m; ++l) {
      const double xl = x(l, col);
      row_i(l) = d2(i, l) + (xk - xl) * (xk - xl) - (xi - xl) * (xi - xl);
      row_k(l) = d2(k, l) + (xi - xl) * (xi - xl) - (xk - xl) * (xk - xl);
    }
    row_i(i) = row_k(k) = std::numeric_limits<double>::infinity();
    row_i(k) = row_k(i) = d2(i, k);

    double candidate = std::min(row_i.minCoeff(), row_k.minCoeff());
    if (candidate >= current) {
      // The minimum over untouched pairs may still bind.
      for (Index a = 0; a < m && candidate >= current; ++a) {
        if (a == i || a == k) continue;
        for (Index b = a + 1; b < m; ++b) {
          if (b == i || b == k) continue;
          candidate = std::min(candidate, d2(a, b));
        }
      }
    }
    if (candidate >= current) {
      std::swap(x(i, col), x(k, col));
      d2.row(i) = row_i.transpose();
      d2.col(i) = row_i;
      d2.row(k) = row_k.transpose();
      d2.col(k) = row_k;
      current = candidate;
    }
  }
  return PointSet(std::move(x));
}

}  // namespace tessel
