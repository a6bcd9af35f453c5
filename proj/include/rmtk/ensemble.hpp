#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rmtk/complex_matrix.hpp"
#include "rmtk/distribution.hpp"
#include "rmtk/rng.hpp"

namespace rmtk {

/// Inhomogeneous ensemble A = M + C * X (Hadamard product) with independent
/// entries x_ij drawn from `entry_dist`.
struct EnsembleSpec {
  std::size_t n = 0;
  ComplexMatrix shift;                    ///< M, n x n
  std::vector<double> scale;              ///< C, n x n row-major, entries sigma_ij >= 0
  std::vector<DistributionSpec> entry_dist;  ///< one law for every entry, or n*n laws row-major
  double declared_b = 0.5;
  double declared_K = 1.0;
  /// When set, every sigma_ij must lie in [alpha, beta] with alpha > 0.
  std::optional<std::pair<double, double>> variance_profile_bounds;

  double sigma(std::size_t i, std::size_t j) const { return scale[i * n + j]; }
  const DistributionSpec& law(std::size_t i, std::size_t j) const {
    return entry_dist.size() == 1 ? entry_dist.front() : entry_dist[i * n + j];
  }
};

/// Zero shift, unit variance profile, i.i.d. entries.
EnsembleSpec iid_ensemble(std::size_t n, DistributionSpec dist);
/// Complex Ginibre: i.i.d. ComplexGaussian(1).
EnsembleSpec ginibre_ensemble(std::size_t n);

void validate(const EnsembleSpec& ens);

/// Entry (i, j) = mu_ij + sigma_ij * x_ij. Entries are drawn in row-major
/// order from the stream of `seed`, including entries whose sigma is zero,
/// so two ensembles that differ only in M or C consume identical streams.
ComplexMatrix sample_matrix(const EnsembleSpec& ens, const SeedSpec& seed);

/// The standardized noise matrix X of the same draw as sample_matrix.
ComplexMatrix sample_noise(const EnsembleSpec& ens, const SeedSpec& seed);

/// A Monte Carlo mean with its standard error.
struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
  std::size_t samples = 0;
};

/// Sample mean with standard error sqrt(var / m) (unbiased variance).
Estimate mean_estimate(const std::vector<double>& xs);
/// hits / total with binomial standard error sqrt(p (1 - p) / total).
Estimate proportion_estimate(std::size_t hits, std::size_t total);

struct HsBudgetReport {
  Estimate normalized_hs;  ///< n^-2 * sum E|A_ij|^2
  double declared_K = 0.0;
  bool within_budget = false;  ///< estimate - 3 SE <= declared_K
};

HsBudgetReport check_hs_budget(const EnsembleSpec& ens, std::size_t trials, std::uint64_t base_seed);

struct BConditionReport {
  double b = 0.0;
  /// P(b <= |Z' - Z''| <= 1/b)
  Estimate two_sided;
  bool two_sided_pass = false;
  /// P(|Z' - Z''| >= b), the weaker form used for compressible vectors.
  Estimate lower_only;
  bool lower_only_pass = false;
};

/// Pass iff estimate - 3 SE >= b, for each variant.
BConditionReport check_b_condition(const DistributionSpec& dist, double b, std::size_t trials,
                                   std::uint64_t base_seed);

/// n^-2 * sum_ij E[|x_ij|^2 1{|x_ij| >= eps sqrt(n)}], estimated over
/// `trials` draws of the noise matrix.
Estimate check_pastur(const EnsembleSpec& ens, double eps, std::size_t trials, std::uint64_t base_seed);

}  // namespace rmtk
