#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rmtk/complex_matrix.hpp"
#include "rmtk/distribution.hpp"
#include "rmtk/ensemble.hpp"
#include "rmtk/rng.hpp"

namespace rmtk {

/// Coordinate laws of a random vector X: either a single law shared by all
/// coordinates or one law per coordinate.
using CoordinateLaws = std::vector<DistributionSpec>;

const DistributionSpec& coordinate_law(const CoordinateLaws& laws, std::size_t j);

struct ConcentrationEstimate {
  double radius = 0.0;
  double estimate = 0.0;  ///< max over sample centers of the fraction within radius
  double std_err = 0.0;
  std::size_t samples = 0;
  cplx witness_center;
  /// Same sample cloud read at radius 2r; dominates the true concentration at r.
  double estimate_2r = 0.0;
  double std_err_2r = 0.0;
};

/// m independent draws of Z' - Z''.
std::vector<cplx> symmetrize_samples(const DistributionSpec& dist, std::size_t m, const SeedSpec& seed);

/// m draws of S = sum_j v_j X_j.
std::vector<cplx> sample_linear_form(std::span<const cplx> v, const CoordinateLaws& laws, std::size_t m,
                                     const SeedSpec& seed);

struct BallCount {
  std::size_t count = 0;
  cplx center;
};

/// max over sample points p of #{q : |p - q| <= r}, with the maximizing
/// point (lowest index among ties). Exact; grid bucketing with pruning.
BallCount max_ball_count(std::span<const cplx> points, double r);

/// Concentration of a fixed sample cloud at radius r (and 2r).
ConcentrationEstimate concentration_of_samples(std::span<const cplx> points, double r);

ConcentrationEstimate levy_concentration(std::span<const cplx> v, const CoordinateLaws& laws, double r,
                                         std::size_t m, const SeedSpec& seed);

/// E exp(-pi |<X^, v>|^2) with X^_j = B_j (X'_j - X''_j), B_j ~ Ber(1/2),
/// and <X^, v> = sum_j v_j X^_j.
Estimate p_functional(std::span<const cplx> v, const CoordinateLaws& laws, std::size_t m, const SeedSpec& seed);

/// Distance from x to the nearest integer.
double dist_to_integer(double x);

/// (E ||Re(a z~)||^2)^(1/2), ||.|| the distance to the nearest integer.
double torus_norm(cplx a, const DistributionSpec& dist, std::size_t m, const SeedSpec& seed);

/// m x n matrix whose rows are independent draws of X~.
ComplexMatrix symmetrized_vector_samples(const CoordinateLaws& laws, std::size_t n, std::size_t m,
                                         const SeedSpec& seed);

/// dist^2(theta w, (Z + iZ)^n) for a single vector w.
double lattice_dist2(cplx theta, std::span<const cplx> w);

/// E dist^2(theta v * X~, (Z + iZ)^n).
Estimate expected_lattice_dist2(cplx theta, std::span<const cplx> v, const CoordinateLaws& laws, std::size_t m,
                                const SeedSpec& seed);

struct CrlcdQuery {
  std::vector<cplx> v;
  double L = 10.0;
  double u = 0.3;
  double grid_min = 1e-2;
  double grid_max = 1e3;
  std::size_t points_per_decade = 40;
  std::size_t phase_points = 64;
  std::size_t mc_samples = 20000;
  /// Bisection stops once the bracket is below rel_tol times its upper end.
  double rel_tol = 1e-7;
};

struct CrlcdResult {
  double value = 0.0;  ///< infimum modulus, or `cap` when no grid point qualifies
  bool capped = false;
  double cap = 0.0;
  cplx witness_theta;
  double lhs_at_witness = 0.0;    ///< E dist^2 at the witness
  double bound_at_witness = 0.0;  ///< min(u |theta|^2 ||v||^2, L^2)
  /// Coarse grid modulus preceding the witness; the inequality fails there at every phase.
  double last_failing_modulus = 0.0;
  std::size_t grid_moduli = 0;
  std::size_t distinct_samples = 0;
};

/// The sample-level CRLCD search, on an explicit fixed sample of X~ (rows).
CrlcdResult crlcd_on_samples(const CrlcdQuery& q, const ComplexMatrix& xtilde, std::size_t workers = 1);

/// Draws q.mc_samples rows of X~ from `seed` and searches the polar grid.
CrlcdResult crlcd(const CrlcdQuery& q, const CoordinateLaws& laws, const SeedSpec& seed, std::size_t workers = 1);

/// True when E dist^2 at theta < min(u |theta|^2 ||v||^2, L^2) on the given sample.
bool crlcd_condition(const CrlcdQuery& q, const ComplexMatrix& xtilde, cplx theta, double* lhs = nullptr,
                     double* bound = nullptr);

/// Outcome of a one-sided statistical check of lhs <= rhs.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_std_err = 0.0;
  double rhs_std_err = 0.0;
  /// Guard-banded slack; negative exactly when `flag` is set.
  double margin = 0.0;
  bool flag = false;
  std::vector<std::pair<std::string, double>> parameters;
  std::string note;
};

/// rho_r <= exp(pi r^2) P_X. Flags when rho - 3 SE > e^{pi r^2} (P + 3 SE).
InequalityReport verify_levy_p_bound(std::span<const cplx> v, const CoordinateLaws& laws, double r, std::size_t m,
                                     const SeedSpec& seed);

struct QuadratureSpec {
  double radius = 3.0;  ///< integration over [-R, R]^2
  std::size_t nodes = 61;  ///< trapezoid nodes per axis
  std::size_t mc_samples = 2000;  ///< X~ draws behind each E dist^2
};

/// rho_r^2 <= 2 e^{2 pi r^2} int exp(-E dist^2(xi w * X~) / 2) e^{-pi |xi|^2} dxi,
/// with the integral by trapezoid quadrature. The integrand is evaluated at
/// E dist^2 - 3 SE, so the reported rhs errs high and the check is one-sided.
InequalityReport verify_doubling_bound(std::span<const cplx> w, const CoordinateLaws& laws, double r,
                                       const QuadratureSpec& quad, std::size_t m, const SeedSpec& seed,
                                       std::size_t workers = 1);

/// rho_eps <= C (eps u^{-1/2} + e^{-L^2/4} + e^{-(pi/4) eps^2 D^2}), D the CRLCD.
/// lhs = rho, rhs = the bracket; C_hat = lhs / rhs is a parameter, flagged above 1e3.
InequalityReport verify_crlcd_tail_bound(std::span<const cplx> v, const CoordinateLaws& laws, double eps,
                                         const CrlcdQuery& q, std::size_t m, const SeedSpec& seed,
                                         std::size_t workers = 1);

struct UniformAnticoncResult {
  bool found = false;
  double best_c = 0.0;
  InequalityReport report;
};

/// Largest c in c_grid with rho_c + 3 SE <= 1 - c (one shared sample cloud).
UniformAnticoncResult verify_uniform_anticonc(std::span<const cplx> v, const CoordinateLaws& laws,
                                              std::vector<double> c_grid, std::size_t m, const SeedSpec& seed);

}  // namespace rmtk
