#include <tessel/parallel.hpp>
#include <tessel/selection.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace tessel {

std::string to_string(Method method) {
  switch (method) {
    case Method::Fssf: return "fssf";
    case Method::SupportPoints: return "support-points";
    case Method::Herding: return "herding";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "fssf" || text == "fssf-fr") return Method::Fssf;
  if (text == "support-points" || text == "sp") return Method::SupportPoints;
  if (text == "herding" || text == "kh") return Method::Herding;
  throw ValidationError("unknown selection method '" + text + "'");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename A, typename B>
bool coincide(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace

SelectionState::SelectionState(Method method, PointSet candidates, PointSet fixed, SelectionOptions options)
    : method_(method), candidates_(std::move(candidates)), fixed_(std::move(fixed)), options_(options) {
  const Index n = candidates_.size();
  if (n == 0) throw ValidationError("selection needs a nonempty candidate set");
  if (fixed_.size() == 0) fixed_ = PointSet(candidates_.dim());
  check_dims(fixed_.dim(), candidates_.dim(), "fixed design");
  if (options_.boundary_factor && !(*options_.boundary_factor >= 0)) {
    throw ValidationError("boundary factor must be nonnegative");
  }
  if (method_ == Method::Fssf && !in_unit_cube(candidates_)) {
    throw DomainError("FSSF-fr candidates must lie in the unit cube; transform after selection");
  }

  eligible_.assign(static_cast<std::size_t>(n), true);
  std::vector<char> clash(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](Index i) {
    for (Index j = 0; j < fixed_.size(); ++j) {
      if (coincide(candidates_.point(i), fixed_.point(j))) {
        clash[static_cast<std::size_t>(i)] = 1;
        break;
      }
    }
  });
  remaining_ = n;
  for (Index i = 0; i < n; ++i) {
    if (clash[static_cast<std::size_t>(i)]) {
      eligible_[static_cast<std::size_t>(i)] = false;
      --remaining_;
    }
  }

  if (method_ == Method::Fssf) {
    min_distance_ = Vector::Constant(n, kInf);
    parallel_for(n, [&](Index i) {
      for (Index j = 0; j < fixed_.size(); ++j) {
        min_distance_(i) = std::min(min_distance_(i), (candidates_.point(i) - fixed_.point(j)).norm());
      }
    });
  } else if (method_ == Method::SupportPoints) {
    // Streaming O(N^2 d) pass; no N x N matrix is stored.
    mean_distance_.resize(n);
    distance_sum_ = Vector::Zero(n);
    const Matrix& s = candidates_.matrix();
    parallel_for(n, [&](Index i) {
      double acc = 0.0;
      for (Index k = 0; k < n; ++k) acc += (s.row(i) - s.row(k)).norm();
      mean_distance_(i) = acc / static_cast<double>(n);
      if (options_.fixed_in_support_sum) {
        for (Index j = 0; j < fixed_.size(); ++j) distance_sum_(i) += (s.row(i) - fixed_.point(j)).norm();
      }
    }, 8);
  }
}

double SelectionState::boundary_factor() const {
  return options_.boundary_factor.value_or(std::numbers::sqrt2 * static_cast<double>(candidates_.dim()));
}

Index SelectionState::anchor_count() const {
  const auto sel = static_cast<Index>(selected_.size());
  if (method_ == Method::SupportPoints && !options_.fixed_in_support_sum) return sel;
  return sel + fixed_.size();
}

void SelectionState::prepare_herding(const Potential& potential) {
  check_dims(potential.kernel().dim(), candidates_.dim(), "herding potential");
  if (!potential.kernel().positive_definite()) {
    throw UnsupportedError("herding needs a positive-definite kernel; use support points for the energy geometry");
  }
  if (herding_kernel_) return;
  herding_kernel_ = potential.kernel();
  target_potential_ = potential.evaluate(candidates_);
  kernel_sum_ = Vector::Zero(candidates_.size());
  const KernelSpec& k = *herding_kernel_;
  parallel_for(candidates_.size(), [&](Index i) {
    for (Index j = 0; j < fixed_.size(); ++j) kernel_sum_(i) += eval_kernel(k, candidates_.point(i), fixed_.point(j));
    for (Index j : selected_) kernel_sum_(i) += eval_kernel(k, candidates_.point(i), candidates_.point(j));
  });
}

void SelectionState::commit(Index index) {
  if (index < 0 || index >= candidates_.size()) throw ValidationError("candidate index out of range");
  if (!eligible(index)) throw ValidationError("candidate " + std::to_string(index) + " is not eligible");
  eligible_[static_cast<std::size_t>(index)] = false;
  --remaining_;
  selected_.push_back(index);
  const auto x = candidates_.point(index);
  const Index n = candidates_.size();
  if (method_ == Method::Fssf) {
    parallel_for(n, [&](Index i) { min_distance_(i) = std::min(min_distance_(i), (candidates_.point(i) - x).norm()); });
  } else if (method_ == Method::SupportPoints) {
    parallel_for(n, [&](Index i) { distance_sum_(i) += (candidates_.point(i) - x).norm(); });
  }
  if (herding_kernel_) {
    parallel_for(n, [&](Index i) { kernel_sum_(i) += eval_kernel(*herding_kernel_, candidates_.point(i), x); });
  }
}

namespace {

// Index-ordered reduction: strict comparison keeps the smallest index on ties.
StepResult pick(const SelectionState& state, const Vector& score, bool maximize) {
  StepResult best;
  for (Index i = 0; i < score.size(); ++i) {
    if (!state.eligible(i)) continue;
    if (best.index < 0 || (maximize ? score(i) > best.score : score(i) < best.score)) {
      best.index = i;
      best.score = score(i);
    }
  }
  return best;
}

void require_remaining(const SelectionState& state) {
  if (state.remaining() == 0) throw ValidationError("no unselected candidate remains");
}

void require_method(const SelectionState& state, Method method) {
  if (state.method() != method) {
    throw ValidationError("selection state was built for " + to_string(state.method()) + ", not " +
                          to_string(method));
  }
}

}  // namespace

StepResult fssf_fr_next(SelectionState& state) {
  require_method(state, Method::Fssf);
  require_remaining(state);
  const PointSet& s = state.candidates();
  const double factor = state.boundary_factor();
  Vector score(s.size());
  parallel_for(s.size(), [&](Index i) {
    score(i) = std::min(state.min_distance()(i), factor * reflected_boundary_distance(s.point(i)));
  });
  StepResult step;
  if (state.anchor_count() == 0) {
    Rng rng(state.options().seed);
    Index k = rng.index(state.remaining());
    for (Index i = 0; i < s.size(); ++i) {
      if (state.eligible(i) && k-- == 0) {
        step = {i, score(i)};
        break;
      }
    }
  } else {
    step = pick(state, score, true);
  }
  state.commit(step.index);
  return step;
}

StepResult support_points_next(SelectionState& state) {
  require_method(state, Method::SupportPoints);
  require_remaining(state);
  const double inv = 1.0 / static_cast<double>(state.anchor_count() + 1);
  const Vector score = state.mean_distance() - inv * state.distance_sum();
  const StepResult step = pick(state, score, false);
  state.commit(step.index);
  return step;
}

StepResult herding_next(SelectionState& state, const Potential& potential) {
  require_method(state, Method::Herding);
  require_remaining(state);
  state.prepare_herding(potential);
  const Index i = state.anchor_count();
  const Vector score = i == 0 ? Vector(-state.target_potential())
                              : Vector(state.kernel_sum() / static_cast<double>(i) - state.target_potential());
  const StepResult step = pick(state, score, false);
  state.commit(step.index);
  return step;
}

StepResult next(SelectionState& state, const Potential* potential) {
  switch (state.method()) {
    case Method::Fssf: return fssf_fr_next(state);
    case Method::SupportPoints: return support_points_next(state);
    case Method::Herding:
      if (potential == nullptr) throw ValidationError("herding needs a target potential");
      return herding_next(state, *potential);
  }
  throw ValidationError("unknown selection method");
}

Selection select_n(SelectionState& state, Index n, const Potential* potential) {
  if (n < 0) throw ValidationError("selection size must be nonnegative");
  if (n > state.remaining()) {
    throw ValidationError("requested " + std::to_string(n) + " points but only " +
                          std::to_string(state.remaining()) + " candidates remain");
  }
  Selection out;
  out.scores.resize(n);
  for (Index k = 0; k < n; ++k) {
    const StepResult step = next(state, potential);
    out.indices.push_back(step.index);
    out.scores(k) = step.score;
  }
  out.points = state.candidates().subset(out.indices);
  return out;
}

Selection select_n(Method method, Index n, const PointSet& candidates, const PointSet& fixed,
                   const TargetMeasure& mu, const KernelSpec& kernel, const SelectionOptions& options) {
  SelectionState state(method, candidates, fixed, options);
  if (method == Method::Herding) {
    const Potential potential = Potential::for_measure(kernel, mu, candidates);
    return select_n(state, n, &potential);
  }
  return select_n(state, n, nullptr);
}

}  // namespace tessel
