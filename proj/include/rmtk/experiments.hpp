#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rmtk/ensemble.hpp"
#include "rmtk/esd.hpp"

namespace rmtk {

/// Builds the ensemble for a given dimension.
using EnsembleFactory = std::function<EnsembleSpec(std::size_t n)>;

struct ExperimentConfig {
  EnsembleFactory x;
  EnsembleFactory y;  ///< comparisons only
  cplx z{0.0, 0.0};
  std::vector<std::size_t> n_list;
  std::vector<double> eps_list;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::size_t workers = 1;
  /// Exponents C for the extreme singular value frequencies.
  std::vector<double> c_grid{0.5, 1.0, 1.5, 2.0};
  EsdGrid grid;
};

void validate(const ExperimentConfig& cfg, bool needs_y);

/// Seed of trial t at dimension n; shared by the X and Y ensembles.
SeedSpec trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial);

struct TailRow {
  std::size_t n = 0;
  double eps = 0.0;
  std::size_t trials = 0;  ///< trials that produced a singular value
  double prob = 0.0;       ///< fraction with s_n <= eps / sqrt(n)
  double std_err = 0.0;
};

struct TailResult {
  std::vector<TailRow> rows;
  std::vector<std::size_t> failures;  ///< per n, in n_list order
  /// Least-squares fit of prob ~ C (eps + exp(-c eps^2 n)), C >= 0.
  double c_fit = 0.0;
  double C_fit = 0.0;
  double fit_sse = 0.0;
  /// s_n per trial, per n (NaN for failed trials).
  std::vector<std::vector<double>> smallest;
};

TailResult run_tail_experiment(const ExperimentConfig& cfg);

struct TailFit {
  double C = 0.0;
  double c = 0.0;
  double sse = 0.0;
};

/// For each c on a log grid over [1e-3, 1e2], C = max(0, <f, p> / <f, f>)
/// with f = eps + exp(-c eps^2 n); returns the pair with least squared error.
TailFit fit_tail_constants(const std::vector<TailRow>& rows);

struct ComparisonRecord {
  std::size_t trial = 0;
  std::size_t n = 0;
  double value = 0.0;
};

struct ComparisonSummary {
  std::size_t n = 0;
  std::size_t used = 0;
  std::size_t excluded = 0;  ///< -inf log-determinants, zero distances or solver failures
  double mean_abs = 0.0;
  double median_abs = 0.0;
  double iqr_abs = 0.0;
  /// 1-based row index range of the distance sum (distance-sum only).
  std::size_t index_lo = 0;
  std::size_t index_hi = 0;
};

struct ComparisonResult {
  std::string quantity;
  std::vector<ComparisonRecord> records;  ///< excluded trials are absent
  std::vector<ComparisonSummary> per_n;
};

/// D = (1/n) (log|det(A(X)/sqrt n - z I)| - log|det(A(Y)/sqrt n - z I)|).
ComparisonResult log_det_comparison(const ExperimentConfig& cfg);

/// First row index (1-based) with i >= n - n^0.99.
std::size_t distance_sum_first_index(std::size_t n);

/// (1/n) sum over i >= n - n^0.99 of log dist(R_i, span R_1..R_{i-1}) for
/// the rows R_i of A(X)/sqrt(n) - z I, minus the same for Y. Over the full
/// range this sum equals the log-determinant difference.
ComparisonResult distance_sum_comparison(const ExperimentConfig& cfg);

/// (1/n) sum of log row distances for i in [first, n] (1-based), or nullopt
/// when a row is numerically dependent on the ones above it.
std::optional<double> row_distance_log_sum(const ComplexMatrix& b, std::size_t first);

/// Distance of the ESDs of A(X)/sqrt(n) and A(Y)/sqrt(n).
ComparisonResult esd_comparison(const ExperimentConfig& cfg);

struct ExtremeSvRecord {
  std::size_t trial = 0;
  std::size_t n = 0;
  double sigma1 = 0.0;
  double sigman = 0.0;
};

struct ExtremeSvFrequency {
  std::size_t n = 0;
  double C = 0.0;
  double large = 0.0;  ///< fraction with sigma_1 >= n^C
  double small = 0.0;  ///< fraction with sigma_n <= n^-C
};

struct ExtremeSvResult {
  std::vector<ExtremeSvRecord> records;
  std::vector<ExtremeSvFrequency> frequencies;
  std::size_t failures = 0;
};

/// sigma_1 and sigma_n of A(X) - z sqrt(n) I.
ExtremeSvResult extreme_sv_check(const ExperimentConfig& cfg);

struct EsdAtom {
  std::size_t trial = 0;
  std::size_t k = 0;
  cplx value;
};

struct EsdExperimentResult {
  std::size_t n = 0;
  std::vector<EsdAtom> atoms;
  std::vector<ComparisonRecord> circular_distance;  ///< esd_distance to the circular law per trial
  std::size_t failures = 0;
};

/// Eigenvalues of A(X)/sqrt(n) per trial, for the first entry of n_list, and
/// their distance to the circular law.
EsdExperimentResult run_esd_experiment(const ExperimentConfig& cfg);

/// Summary statistics of |values|.
ComparisonSummary summarize_abs(std::size_t n, const std::vector<double>& values, std::size_t excluded);

}  // namespace rmtk
