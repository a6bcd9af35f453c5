#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rmtk/complex_matrix.hpp"

namespace rmtk {

enum class SpectrumKind { Singular, Eigen };

struct SpectrumResult {
  SpectrumKind kind = SpectrumKind::Singular;
  /// Singular: real, non-negative, non-increasing. Eigen: the multiset of
  /// eigenvalues in deflation order.
  std::vector<cplx> values;
  double residual_tol = 0.0;
  std::size_t iterations = 0;

  /// Real parts of `values`; the singular values themselves for kind Singular.
  std::vector<double> real_values() const;
};

/// s_1 >= ... >= s_k, k = min(rows, cols). Householder bidiagonalization
/// followed by implicit-shift QL on the 2k x 2k Golub-Kahan tridiagonal,
/// whose eigenvalues are +-s_i. Absolute accuracy is a small multiple of
/// machine epsilon times s_1. Throws ConvergenceError past the iteration cap.
SpectrumResult singular_values(const ComplexMatrix& a);

double smallest_singular_value(const ComplexMatrix& a);
double largest_singular_value(const ComplexMatrix& a);

/// Eigenvalues of a Hermitian matrix (only the lower triangle is read),
/// ascending. Householder tridiagonalization + implicit-shift QL.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h);

/// Eigenvalues of a symmetric tridiagonal matrix, ascending. `offdiag` has
/// one entry fewer than `diag`.
std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag, std::vector<double> offdiag,
                                            std::size_t* iterations = nullptr);

/// Eigenvalues of a general square matrix: unitary Hessenberg reduction,
/// then single-shift complex QR with Wilkinson shifts. Deflation when
/// |h(k+1,k)| <= 1e-13 (|h(k,k)| + |h(k+1,k+1)|); at most 100 n sweeps.
SpectrumResult eigenvalues(const ComplexMatrix& a);

/// Euclidean distance from x to span(vectors). Modified Gram-Schmidt with a
/// second orthogonalization pass; vectors whose residual falls below
/// 1e-12 of their own norm are treated as dependent and dropped.
double dist_to_subspace(std::span<const cplx> x, std::span<const std::vector<cplx>> span);

/// Orthonormal basis grown one vector at a time. `add` returns the distance
/// of the new vector to the span of everything added before it.
class IncrementalBasis {
 public:
  explicit IncrementalBasis(std::size_t dim) : dim_(dim) {}

  double distance(std::span<const cplx> x) const;
  double add(std::span<const cplx> x);

  std::size_t rank() const noexcept { return basis_.size(); }
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::vector<cplx> residual(std::span<const cplx> x) const;

  std::size_t dim_;
  std::vector<std::vector<cplx>> basis_;
};

/// log|det A| from partial-pivoted LU, summed in the log domain. Returns
/// -infinity when a pivot magnitude falls below 1e-300.
double log_abs_det(const ComplexMatrix& a);

struct SecondMomentIdentity {
  double lhs = 0.0;      ///< sum_j s_j^-2
  double rhs = 0.0;      ///< sum_j dist(row_j, span of the other rows)^-2
  double rel_err = 0.0;  ///< |lhs - rhs| / lhs
};

/// Throws NearSingularError when s_n <= 1e-10 s_1.
SecondMomentIdentity negative_second_moment_check(const ComplexMatrix& a);

struct Norms {
  double s1 = 0.0;  ///< operator norm
  double hs = 0.0;  ///< Hilbert-Schmidt norm
};

Norms operator_and_hs_norms(const ComplexMatrix& a);

}  // namespace rmtk
