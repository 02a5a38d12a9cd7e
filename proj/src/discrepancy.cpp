#include <tessel/discrepancy.hpp>
#include <tessel/parallel.hpp>

namespace tessel {

double checked_potential_uniform_matern52(double x, double theta) {
  if (!(theta > 0)) throw DomainError("potential lengthscale must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("uniform potential argument outside [0,1]");
  return potential_uniform_matern52(x, theta);
}

double checked_potential_normal_matern52(double x, double theta) {
  if (!(theta > 0)) throw DomainError("potential lengthscale must be positive");
  if (!std::isfinite(x)) throw DomainError("normal potential argument must be finite");
  return potential_normal_matern52(x, theta);
}

namespace {

// Per-axis classification for analytic mode; nullopt when unsupported.
std::optional<std::vector<bool>> analytic_axes(const KernelSpec& kernel, const TargetMeasure& mu) {
  if (kernel.family != KernelFamily::Matern52 || kernel.form != KernelForm::TensorProduct) return std::nullopt;
  if (mu.is_empirical() || mu.dim() != kernel.dim()) return std::nullopt;
  std::vector<bool> normal;
  for (const auto& m : mu.marginals()) {
    if (const auto* u = std::get_if<UniformMarginal>(&m); u && u->lower == 0.0 && u->upper == 1.0) {
      normal.push_back(false);
    } else if (const auto* n = std::get_if<NormalMarginal>(&m); n && n->mean == 0.0 && n->sd == 1.0) {
      normal.push_back(true);
    } else {
      return std::nullopt;
    }
  }
  return normal;
}

}  // namespace

bool Potential::analytic_supported(const KernelSpec& kernel, const TargetMeasure& mu) {
  return analytic_axes(kernel, mu).has_value();
}

Potential Potential::analytic(const KernelSpec& kernel, const TargetMeasure& mu) {
  kernel.validate();
  auto axes = analytic_axes(kernel, mu);
  if (!axes) {
    throw UnsupportedError("analytic potential needs a tensor Matern 5/2 kernel and U(0,1) or N(0,1) marginals");
  }
  Potential p;
  p.kernel_ = kernel;
  p.mode_ = PotentialMode::Analytic;
  p.normal_axis_ = std::move(*axes);
  p.measure_ = mu;
  return p;
}

Potential Potential::empirical(const KernelSpec& kernel, const PointSet& atoms, const Vector& weights) {
  kernel.validate();
  if (atoms.size() == 0) throw ValidationError("empirical potential needs at least one atom");
  check_dims(atoms.dim(), kernel.dim(), "empirical potential");
  Potential p;
  p.kernel_ = kernel;
  p.mode_ = PotentialMode::Empirical;
  p.atoms_ = atoms;
  if (weights.size() == 0) {
    p.weights_ = Vector::Constant(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
  } else {
    check_dims(weights.size(), atoms.size(), "empirical potential weights");
    p.weights_ = weights;
  }
  p.measure_ = TargetMeasure::empirical(atoms, weights);
  return p;
}

Potential Potential::for_measure(const KernelSpec& kernel, const TargetMeasure& mu, const PointSet& fallback) {
  if (analytic_supported(kernel, mu)) return analytic(kernel, mu);
  if (mu.is_empirical()) return empirical(kernel, mu.empirical_part().atoms, mu.empirical_part().weights);
  return empirical(kernel, fallback);
}

Vector Potential::evaluate(const PointSet& x) const {
  check_dims(x.dim(), kernel_.dim(), "potential");
  Vector p(x.size());
  parallel_for(x.size(), [&](Index i) { p(i) = (*this)(x.point(i)); });
  return p;
}

double Potential::energy() const {
  std::call_once(energy_->once, [this] {
    if (mode_ == PotentialMode::Analytic) {
      // Skip index 0: the origin maps to -infinity under a normal quantile.
      const PointSet qmc = iso_transform(sobol_sequence(kernel_.dim(), kEnergyQmcPoints, 1), measure_);
      energy_->value = evaluate(qmc).mean();
    } else {
      const Vector pot = evaluate(atoms_);
      energy_->value = weights_.dot(pot);
    }
  });
  return energy_->value;
}

double mmd_squared(const PointSet& x, const Vector& weights, const Potential& mu, EnergyMode mode) {
  check_dims(weights.size(), x.size(), "mmd weights");
  const double energy = mode == EnergyMode::Absolute ? mu.energy() : 0.0;
  return mmd_squared(gram(mu.kernel(), x), weights, mu.evaluate(x), energy);
}

double mmd_squared(const PointSet& x, const Potential& mu, EnergyMode mode) {
  if (x.size() == 0) throw ValidationError("mmd of an empty design");
  return mmd_squared(x, Vector::Constant(x.size(), 1.0 / static_cast<double>(x.size())), mu, mode);
}

}  // namespace tessel
