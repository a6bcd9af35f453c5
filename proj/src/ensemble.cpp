#include "rmtk/ensemble.hpp"

#include <cmath>
#include <string>

#include "rmtk/errors.hpp"

namespace rmtk {

Estimate mean_estimate(const std::vector<double>& xs) {
  Estimate e;
  e.samples = xs.size();
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.value = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.value) * (x - e.value);
    e.std_err = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return e;
}

Estimate proportion_estimate(std::size_t hits, std::size_t total) {
  Estimate e;
  e.samples = total;
  e.value = static_cast<double>(hits) / static_cast<double>(total);
  e.std_err = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(total));
  return e;
}

EnsembleSpec iid_ensemble(std::size_t n, DistributionSpec dist) {
  EnsembleSpec ens;
  ens.n = n;
  ens.shift = ComplexMatrix(n, n);
  ens.scale.assign(n * n, 1.0);
  ens.entry_dist = {std::move(dist)};
  return ens;
}

EnsembleSpec ginibre_ensemble(std::size_t n) { return iid_ensemble(n, ComplexGaussian{1.0}); }

void validate(const EnsembleSpec& ens) {
  const std::size_t n = ens.n;
  if (n == 0) throw ValidationError("ensemble dimension must be positive");
  if (ens.shift.rows() != n || ens.shift.cols() != n)
    throw ValidationError("shift matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  if (ens.scale.size() != n * n)
    throw ValidationError("scale matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  if (!ens.shift.all_finite()) throw ValidationError("shift matrix has non-finite entries");
  for (double s : ens.scale)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("scale entries must be finite and non-negative");
  if (ens.entry_dist.size() != 1 && ens.entry_dist.size() != n * n)
    throw ValidationError("entry distributions must be given once or per entry");
  for (const auto& d : ens.entry_dist) validate(d);
  if (!(ens.declared_b > 0.0 && ens.declared_b < 1.0)) throw ValidationError("declared_b must lie in (0, 1)");
  if (!(ens.declared_K > 0.0)) throw ValidationError("declared_K must be positive");
  if (ens.variance_profile_bounds) {
    const auto [alpha, beta] = *ens.variance_profile_bounds;
    if (!(alpha > 0.0 && alpha <= beta && std::isfinite(beta)))
      throw ValidationError("variance profile bounds need 0 < alpha <= beta < inf");
    for (double s : ens.scale)
      if (s < alpha || s > beta)
        throw ValidationError("scale entry outside the declared [alpha, beta] band");
  }
}

ComplexMatrix sample_noise(const EnsembleSpec& ens, const SeedSpec& seed) {
  validate(ens);
  Rng rng(seed);
  ComplexMatrix x(ens.n, ens.n);
  for (std::size_t i = 0; i < ens.n; ++i)
    for (std::size_t j = 0; j < ens.n; ++j) x(i, j) = draw(ens.law(i, j), rng);
  return x;
}

ComplexMatrix sample_matrix(const EnsembleSpec& ens, const SeedSpec& seed) {
  ComplexMatrix a = sample_noise(ens, seed);
  for (std::size_t i = 0; i < ens.n; ++i)
    for (std::size_t j = 0; j < ens.n; ++j) a(i, j) = ens.shift(i, j) + ens.sigma(i, j) * a(i, j);
  return a;
}

HsBudgetReport check_hs_budget(const EnsembleSpec& ens, std::size_t trials, std::uint64_t base_seed) {
  if (trials == 0) throw ValidationError("check_hs_budget needs at least one trial");
  validate(ens);
  const double n2 = static_cast<double>(ens.n) * static_cast<double>(ens.n);
  std::vector<double> per_trial(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const ComplexMatrix a = sample_matrix(ens, SeedSpec{base_seed, t});
    per_trial[t] = norm2_squared(a.entries()) / n2;
  }
  HsBudgetReport r;
  r.normalized_hs = mean_estimate(per_trial);
  r.declared_K = ens.declared_K;
  r.within_budget = r.normalized_hs.value - 3.0 * r.normalized_hs.std_err <= ens.declared_K;
  return r;
}

BConditionReport check_b_condition(const DistributionSpec& dist, double b, std::size_t trials,
                                   std::uint64_t base_seed) {
  if (!(b > 0.0 && b < 1.0)) throw ValidationError("b must lie in (0, 1)");
  if (trials == 0) throw ValidationError("check_b_condition needs at least one trial");
  validate(dist);
  Rng rng(SeedSpec{base_seed, 0});
  std::size_t two_sided = 0;
  std::size_t lower = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double m = std::abs(draw_symmetrized(dist, rng));
    if (m >= b) {
      ++lower;
      if (m <= 1.0 / b) ++two_sided;
    }
  }
  BConditionReport r;
  r.b = b;
  r.two_sided = proportion_estimate(two_sided, trials);
  r.lower_only = proportion_estimate(lower, trials);
  r.two_sided_pass = r.two_sided.value - 3.0 * r.two_sided.std_err >= b;
  r.lower_only_pass = r.lower_only.value - 3.0 * r.lower_only.std_err >= b;
  return r;
}

Estimate check_pastur(const EnsembleSpec& ens, double eps, std::size_t trials, std::uint64_t base_seed) {
  if (!(eps > 0.0)) throw ValidationError("Pastur threshold eps must be positive");
  if (trials == 0) throw ValidationError("check_pastur needs at least one trial");
  const double threshold = eps * std::sqrt(static_cast<double>(ens.n));
  const double n2 = static_cast<double>(ens.n) * static_cast<double>(ens.n);
  std::vector<double> per_trial(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const ComplexMatrix x = sample_noise(ens, SeedSpec{base_seed, t});
    double s = 0.0;
    for (const auto& z : x.entries())
      if (std::abs(z) >= threshold) s += std::norm(z);
    per_trial[t] = s / n2;
  }
  return mean_estimate(per_trial);
}

}  // namespace rmtk
