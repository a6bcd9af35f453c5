#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rmtk/anticonc.hpp"
#include "rmtk/complex_matrix.hpp"
#include "rmtk/ensemble.hpp"
#include "rmtk/rng.hpp"

namespace rmtk {

struct SphereParams {
  double delta = 0.1;
  double rho = 0.1;
};

/// floor(delta n), with a 1e-9 allowance so that e.g. 0.1 * 30 counts as 3.
std::size_t sparse_budget(std::size_t n, double delta);

enum class VectorKind { Sparse, Compressible, Incompressible };

struct Classification {
  VectorKind kind = VectorKind::Incompressible;
  double dist_to_sparse = 0.0;
  /// Sparse vectors are compressible too.
  bool compressible() const noexcept { return kind != VectorKind::Incompressible; }
};

/// Norm of u after zeroing its floor(delta n) largest-modulus coordinates
/// (ties broken by lowest index). Throws unless ||u|| = 1 within 1e-10.
double dist_to_sparse(std::span<const cplx> u, double delta);

Classification classify(std::span<const cplx> u, const SphereParams& params);

/// Unit vector uniform on the complex sphere.
std::vector<cplx> random_unit_vector(std::size_t n, Rng& rng);

/// Random compressible unit vector: a unit vector on a random support of
/// size floor(delta n) plus an off-support perturbation, renormalized so that
/// its distance to Sparse(delta) is at most rho.
std::vector<cplx> sample_compressible(std::size_t n, const SphereParams& params, Rng& rng);

struct ProbabilityRow {
  double c = 0.0;
  Estimate prob;
  double reference = 0.0;  ///< (1 - c)^n
  bool qualifies = false;
};

struct SingleVectorReport {
  std::vector<ProbabilityRow> rows;
  bool found = false;
  double best_c = 0.0;  ///< largest qualifying c
  std::size_t trials = 0;
};

/// P(||A v|| <= c sqrt(n)) over `trials` matrices for each c in c_grid; c
/// qualifies when the estimate is at most (1 - c)^n + 3 SE.
SingleVectorReport single_vector_invertibility(const EnsembleSpec& ens, std::span<const cplx> v,
                                               const std::vector<double>& c_grid, std::size_t trials,
                                               std::uint64_t base_seed, std::size_t workers = 1);

struct CompressibleReport {
  std::vector<double> min_ratio;  ///< per trial: min over sampled x of ||A x|| / sqrt(n)
  std::vector<double> thresholds;
  std::vector<double> fraction_below;  ///< per threshold: fraction of trials with min below it
  std::size_t vector_samples = 0;
  double max_sampled_dist = 0.0;  ///< largest dist_to_sparse among the sampled vectors
};

/// min over sampled compressible x of ||A x|| / sqrt(n), per matrix trial.
/// Matrix t uses SeedSpec{base_seed, t}; its vectors use that seed's child 1.
CompressibleReport compressible_inf_probe(const EnsembleSpec& ens, const SphereParams& params,
                                          std::size_t vector_samples, std::size_t trials,
                                          const std::vector<double>& thresholds, std::uint64_t base_seed,
                                          std::size_t workers = 1);

/// Same probe on a fixed matrix.
double compressible_min_ratio(const ComplexMatrix& a, const SphereParams& params, std::size_t vector_samples,
                              const SeedSpec& seed, double* max_dist = nullptr);

/// (4 / (delta n)) #{j in I : dist(A_j, H_j) <= eps}, with A_j the j-th
/// column, H_j the span of the others, and I all columns except the
/// floor(delta n / 2) of largest norm.
double distance_rhs_for_matrix(const ComplexMatrix& a, const SphereParams& params, double eps);

struct DistanceProbeReport {
  Estimate lhs;  ///< P(s_n(A) <= eps rho / sqrt(n))
  Estimate rhs;  ///< mean of distance_rhs_for_matrix
  double margin = 0.0;  ///< (rhs + 3 SE) - (lhs - 3 SE)
  bool flag = false;
  std::size_t trials = 0;
};

/// Requires n >= 4 / delta.
DistanceProbeReport invertibility_via_distance_probe(const EnsembleSpec& ens, const SphereParams& params, double eps,
                                                     std::size_t trials, std::uint64_t base_seed,
                                                     std::size_t workers = 1);

struct CrlcdScanEntry {
  std::vector<cplx> v;
  Classification classification;
  bool scanned = false;
  CrlcdResult crlcd;
};

struct CrlcdScanReport {
  std::vector<CrlcdScanEntry> entries;
  double column_second_moment = 0.0;  ///< T = sum_i E|A_i1|^2
  double min_crlcd = 0.0;
  double h_fit = 0.0;  ///< min_crlcd * sqrt(T) / n
  std::size_t scanned = 0;
  std::size_t all_capped = 0;
};

/// CRLCD of incompressible unit vectors against the law of the first column
/// of A (the shift cancels under symmetrization, so coordinate i has law
/// sigma_i1 x_i1). Uses `candidates` when given, else draws `vector_samples`
/// uniform unit vectors; compressible vectors are classified and skipped.
CrlcdScanReport crlcd_incompressible_scan(const EnsembleSpec& ens, const SphereParams& params,
                                          const CrlcdQuery& query_template, std::size_t vector_samples,
                                          const std::vector<std::vector<cplx>>& candidates, const SeedSpec& seed,
                                          std::size_t workers = 1);

}  // namespace rmtk
