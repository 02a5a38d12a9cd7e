#pragma once

#include <tessel/discrepancy.hpp>

#include <optional>
#include <string>
#include <vector>

namespace tessel {

enum class Method { Fssf, SupportPoints, Herding };

std::string to_string(Method method);
/// Accepts `fssf`, `support-points` and `herding`.
Method parse_method(const std::string& text);

struct SelectionOptions {
  /// Multiplier of the reflected boundary distance in FSSF-fr; sqrt(2) d when unset.
  std::optional<double> boundary_factor;
  /// Whether fixed points enter the second sum of the support-points rule.
  bool fixed_in_support_sum = true;
  std::uint64_t seed = 0;
};

/// Incremental selection over a candidate set, resumable from a fixed design.
///
/// Candidates closer than 1e-12 (per coordinate) to a fixed point are never
/// eligible. The per-method caches are updated in O(N d) per committed point
/// and always equal their from-scratch values up to rounding.
class SelectionState {
 public:
  SelectionState(Method method, PointSet candidates, PointSet fixed = PointSet(),
                 SelectionOptions options = {});

  Method method() const { return method_; }
  const PointSet& candidates() const { return candidates_; }
  const PointSet& fixed() const { return fixed_; }
  const std::vector<Index>& selected() const { return selected_; }
  const SelectionOptions& options() const { return options_; }
  bool eligible(Index i) const { return eligible_[static_cast<std::size_t>(i)]; }
  Index remaining() const { return remaining_; }

  double boundary_factor() const;

  /// Min distance from each candidate to selected and fixed points (+inf when both empty).
  const Vector& min_distance() const { return min_distance_; }
  /// (1/N) sum_k |x - s_k| over all candidates.
  const Vector& mean_distance() const { return mean_distance_; }
  /// Running sum of distances to the points entering the support-points rule.
  const Vector& distance_sum() const { return distance_sum_; }
  /// Running sum of K(x, .) over selected and fixed points; empty until herding starts.
  const Vector& kernel_sum() const { return kernel_sum_; }
  const Vector& target_potential() const { return target_potential_; }

  /// Number of points in the running sums of the active rule.
  Index anchor_count() const;

  /// Marks candidate `index` as selected and updates caches.
  void commit(Index index);

  /// Lazily evaluates the target potential and kernel sums for herding.
  void prepare_herding(const Potential& potential);

 private:
  Method method_;
  PointSet candidates_;
  PointSet fixed_;
  SelectionOptions options_;
  std::vector<Index> selected_;
  std::vector<bool> eligible_;
  Index remaining_ = 0;

  Vector min_distance_;
  Vector mean_distance_;
  Vector distance_sum_;
  Vector kernel_sum_;
  Vector target_potential_;
  std::optional<KernelSpec> herding_kernel_;
};

struct StepResult {
  Index index = -1;
  double score = 0.0;
};

/// argmax of min(min-distance to selected and fixed, factor * 2 min_j min(x_j, 1 - x_j));
/// the first point of an empty design is drawn uniformly from the eligible candidates.
StepResult fssf_fr_next(SelectionState& state);

/// argmin of mean distance to candidates minus (1/(i+1)) sum of distances to the i anchors.
StepResult support_points_next(SelectionState& state);

/// argmin of (1/i) sum_j K(x, x_j) - P_{K,mu}(x); argmax of P_{K,mu} when i = 0.
StepResult herding_next(SelectionState& state, const Potential& potential);

/// Dispatches on the state's method; `potential` is required for herding only.
StepResult next(SelectionState& state, const Potential* potential);

struct Selection {
  std::vector<Index> indices;
  Vector scores;
  PointSet points;
};

/// Runs n further steps on `state`.
Selection select_n(SelectionState& state, Index n, const Potential* potential = nullptr);

/// Fresh n-point selection. Herding uses Potential::for_measure(kernel, mu, candidates).
Selection select_n(Method method, Index n, const PointSet& candidates, const PointSet& fixed,
                   const TargetMeasure& mu, const KernelSpec& kernel, const SelectionOptions& options = {});

/// 2 min_j min(x_j, 1 - x_j), the distance to the mirror image across the nearest face.
template <typename Derived>
double reflected_boundary_distance(const Eigen::MatrixBase<Derived>& x) {
  return 2.0 * x.array().min(1.0 - x.array()).minCoeff();
}

}  // namespace tessel
