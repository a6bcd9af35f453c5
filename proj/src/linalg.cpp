#include "rmtk/linalg.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "rmtk/errors.hpp"

namespace rmtk {
namespace {

constexpr double kEps = DBL_EPSILON;

// Turns x into the Householder vector v of H = I - tau v v^H with
// H x = alpha e_1 and returns alpha. tau = 0 (H = I) when x = 0.
cplx make_reflector(std::span<cplx> x, double& tau) {
  const double sigma2 = norm2_squared(x);
  if (sigma2 == 0.0) {
    tau = 0.0;
    return 0.0;
  }
  const double sigma = std::sqrt(sigma2);
  const double a0 = std::abs(x[0]);
  const cplx phase = a0 == 0.0 ? cplx(1.0) : x[0] / a0;
  const cplx alpha = -phase * sigma;
  x[0] -= alpha;
  tau = 1.0 / (sigma * (sigma + a0));
  return alpha;
}

// Complex Givens rotation G = [[c, s], [-conj(s), c]] with G [a; b] = [r; 0].
struct Givens {
  double c;
  cplx s;
};

Givens make_givens(cplx a, cplx b) {
  const double abs_a = std::abs(a);
  const double abs_b = std::abs(b);
  if (abs_b == 0.0) return {1.0, 0.0};
  if (abs_a == 0.0) return {0.0, std::conj(b) / abs_b};
  const double nu = std::hypot(abs_a, abs_b);
  return {abs_a / nu, (a / abs_a) * std::conj(b) / nu};
}

void check_finite(const ComplexMatrix& a, const char* who) {
  if (!a.all_finite()) throw ValidationError(std::string(who) + ": matrix has non-finite entries");
}

// Upper bidiagonal (d, e) of an m x k matrix with m >= k; only moduli are
// kept since a complex bidiagonal is unitarily equivalent to the real one
// built from the moduli of its entries.
void bidiagonalize(ComplexMatrix w, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t m = w.rows();
  const std::size_t k = w.cols();
  d.assign(k, 0.0);
  e.assign(k > 0 ? k - 1 : 0, 0.0);
  std::vector<cplx> v;
  std::vector<cplx> acc;
  for (std::size_t c = 0; c < k; ++c) {
    // Left reflector on column c, rows c..m-1.
    v.resize(m - c);
    for (std::size_t i = c; i < m; ++i) v[i - c] = w(i, c);
    double tau = 0.0;
    d[c] = std::abs(make_reflector(v, tau));
    if (tau != 0.0 && c + 1 < k) {
      acc.assign(k - c - 1, 0.0);
      for (std::size_t i = c; i < m; ++i) {
        const cplx vi = std::conj(v[i - c]);
        const auto row = w.row(i);
        for (std::size_t j = c + 1; j < k; ++j) acc[j - c - 1] += vi * row[j];
      }
      for (std::size_t i = c; i < m; ++i) {
        const cplx f = tau * v[i - c];
        auto row = w.row(i);
        for (std::size_t j = c + 1; j < k; ++j) row[j] -= f * acc[j - c - 1];
      }
    }
    if (c + 1 >= k) continue;
    // Right reflector on row c, columns c+1..k-1. Reflecting conj(row)
    // from the left is the same as reflecting the row from the right.
    v.resize(k - c - 1);
    for (std::size_t j = c + 1; j < k; ++j) v[j - c - 1] = std::conj(w(c, j));
    e[c] = std::abs(make_reflector(v, tau));
    if (tau == 0.0) continue;
    for (std::size_t i = c + 1; i < m; ++i) {
      auto row = w.row(i);
      cplx s{};
      for (std::size_t j = c + 1; j < k; ++j) s += row[j] * v[j - c - 1];
      s *= tau;
      for (std::size_t j = c + 1; j < k; ++j) row[j] -= s * std::conj(v[j - c - 1]);
    }
  }
}

}  // namespace

std::vector<double> SpectrumResult::real_values() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
  return out;
}

std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> offdiag,
                                            std::size_t* iterations) {
  const std::size_t n = d.size();
  if (n == 0) return d;
  if (offdiag.size() + 1 != n) throw ValidationError("tridiagonal: offdiag must have n-1 entries");
  std::vector<double> e(n, 0.0);
  std::copy(offdiag.begin(), offdiag.end(), e.begin());

  double anorm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]) + (i ? std::abs(e[i - 1]) : 0.0));
  const double abs_floor = kEps * anorm;

  constexpr int kMaxPerEigenvalue = 60;
  std::size_t total = 0;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd || std::abs(e[m]) <= abs_floor) break;
      }
      if (m != l) {
        if (iter++ == kMaxPerEigenvalue) {
          std::vector<cplx> partial(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(l));
          throw ConvergenceError("tridiagonal QL did not converge", l, std::move(partial));
        }
        ++total;
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        bool early = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            early = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (early) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  if (iterations) *iterations = total;
  std::sort(d.begin(), d.end());
  return d;
}

SpectrumResult singular_values(const ComplexMatrix& a) {
  check_finite(a, "singular_values");
  SpectrumResult result;
  result.kind = SpectrumKind::Singular;
  const std::size_t k = std::min(a.rows(), a.cols());
  if (k == 0) return result;

  std::vector<double> d;
  std::vector<double> e;
  bidiagonalize(a.rows() >= a.cols() ? a : a.adjoint(), d, e);

  // Golub-Kahan form: zero diagonal, off-diagonal d0, e0, d1, e1, ..., d_{k-1}.
  std::vector<double> gk_off(2 * k - 1);
  for (std::size_t i = 0; i < k; ++i) {
    gk_off[2 * i] = d[i];
    if (i + 1 < k) gk_off[2 * i + 1] = e[i];
  }
  std::size_t iters = 0;
  std::vector<double> ev = tridiagonal_eigenvalues(std::vector<double>(2 * k, 0.0), std::move(gk_off), &iters);

  result.values.resize(k);
  for (std::size_t i = 0; i < k; ++i) result.values[i] = std::max(0.0, ev[2 * k - 1 - i]);
  result.iterations = iters;
  result.residual_tol = kEps * (result.values.empty() ? 0.0 : result.values.front().real());
  return result;
}

double smallest_singular_value(const ComplexMatrix& a) {
  const auto s = singular_values(a);
  return s.values.empty() ? 0.0 : s.values.back().real();
}

double largest_singular_value(const ComplexMatrix& a) {
  const auto s = singular_values(a);
  return s.values.empty() ? 0.0 : s.values.front().real();
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h_in) {
  if (!h_in.is_square()) throw ValidationError("hermitian_eigenvalues: matrix must be square");
  check_finite(h_in, "hermitian_eigenvalues");
  const std::size_t n = h_in.rows();
  if (n == 0) return {};
  ComplexMatrix h = h_in;
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = h(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) h(i, j) = std::conj(h(j, i));
  }

  std::vector<double> diag(n);
  std::vector<double> off(n - 1);
  std::vector<cplx> v;
  std::vector<cplx> p;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    v.resize(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = h(k + 1 + i, k);
    double tau = 0.0;
    off[k] = std::abs(make_reflector(v, tau));
    diag[k] = h(k, k).real();
    if (tau == 0.0) continue;
    // Trailing block <- P B P with P = I - tau v v^H, as the rank-2 update
    // B - v w^H - w v^H where w = p - (tau/2)(v^H p) v and p = tau B v.
    p.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      cplx s{};
      for (std::size_t j = 0; j < m; ++j) s += h(k + 1 + i, k + 1 + j) * v[j];
      p[i] = tau * s;
    }
    const cplx kfac = 0.5 * tau * dot(v, p);
    for (std::size_t i = 0; i < m; ++i) p[i] -= kfac * v[i];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        h(k + 1 + i, k + 1 + j) -= v[i] * std::conj(p[j]) + p[i] * std::conj(v[j]);
  }
  if (n >= 2) {
    diag[n - 2] = h(n - 2, n - 2).real();
    off[n - 2] = std::abs(h(n - 1, n - 2));
  }
  diag[n - 1] = h(n - 1, n - 1).real();
  return tridiagonal_eigenvalues(std::move(diag), std::move(off));
}

SpectrumResult eigenvalues(const ComplexMatrix& a) {
  if (!a.is_square()) throw ValidationError("eigenvalues: matrix must be square");
  check_finite(a, "eigenvalues");
  const std::size_t n = a.rows();
  SpectrumResult result;
  result.kind = SpectrumKind::Eigen;
  if (n == 0) return result;

  ComplexMatrix h = a;
  std::vector<cplx> v;
  std::vector<cplx> acc;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    v.resize(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = h(k + 1 + i, k);
    double tau = 0.0;
    const cplx alpha = make_reflector(v, tau);
    if (tau == 0.0) continue;
    acc.assign(n - k, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const cplx vi = std::conj(v[i]);
      const auto row = h.row(k + 1 + i);
      for (std::size_t j = k; j < n; ++j) acc[j - k] += vi * row[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
      const cplx f = tau * v[i];
      auto row = h.row(k + 1 + i);
      for (std::size_t j = k; j < n; ++j) row[j] -= f * acc[j - k];
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto row = h.row(i);
      cplx s{};
      for (std::size_t j = 0; j < m; ++j) s += row[k + 1 + j] * v[j];
      s *= tau;
      for (std::size_t j = 0; j < m; ++j) row[k + 1 + j] -= s * std::conj(v[j]);
    }
    h(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }

  double hnorm = norm2(h.entries());
  constexpr double kDeflate = 1e-13;
  const std::size_t cap = 100 * n;
  std::size_t total = 0;
  std::size_t since_deflation = 0;
  std::vector<cplx> eig(n);
  std::vector<Givens> rot(n);

  std::size_t hi = n - 1;
  while (true) {
    if (hi == 0) {
      eig[0] = h(0, 0);
      break;
    }
    std::size_t l = hi;
    while (l > 0) {
      double tol = kDeflate * (std::abs(h(l - 1, l - 1)) + std::abs(h(l, l)));
      if (tol == 0.0) tol = kDeflate * hnorm;
      if (std::abs(h(l, l - 1)) <= tol) {
        h(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == hi) {
      eig[hi] = h(hi, hi);
      --hi;
      since_deflation = 0;
      continue;
    }
    if (total >= cap) {
      std::vector<cplx> partial(eig.begin() + static_cast<std::ptrdiff_t>(hi + 1), eig.end());
      throw ConvergenceError("complex QR did not converge after " + std::to_string(cap) +
                                 " iterations; " + std::to_string(partial.size()) + " of " +
                                 std::to_string(n) + " eigenvalues deflated",
                             partial.size(), std::move(partial));
    }
    ++total;
    ++since_deflation;

    cplx mu;
    if (since_deflation % 10 == 0) {
      // Exceptional shift to break cycles (e.g. permutation matrices).
      mu = h(hi, hi) + cplx(0.75, 0.4375) * std::abs(h(hi, hi - 1));
    } else {
      const cplx a11 = h(hi - 1, hi - 1);
      const cplx a12 = h(hi - 1, hi);
      const cplx a21 = h(hi, hi - 1);
      const cplx a22 = h(hi, hi);
      const cplx half = 0.5 * (a11 - a22);
      const cplx disc = std::sqrt(half * half + a12 * a21);
      const cplx mu1 = a22 + half + disc;
      const cplx mu2 = a22 + half - disc;
      mu = std::abs(mu1 - a22) <= std::abs(mu2 - a22) ? mu1 : mu2;
    }

    for (std::size_t i = l; i <= hi; ++i) h(i, i) -= mu;
    for (std::size_t k = l; k < hi; ++k) {
      const Givens g = make_givens(h(k, k), h(k + 1, k));
      rot[k] = g;
      for (std::size_t j = k; j <= hi; ++j) {
        const cplx x = h(k, j);
        const cplx y = h(k + 1, j);
        h(k, j) = g.c * x + g.s * y;
        h(k + 1, j) = -std::conj(g.s) * x + g.c * y;
      }
      h(k + 1, k) = 0.0;
    }
    for (std::size_t k = l; k < hi; ++k) {
      const Givens g = rot[k];
      const std::size_t last = std::min(k + 1, hi);
      for (std::size_t i = l; i <= last; ++i) {
        const cplx x = h(i, k);
        const cplx y = h(i, k + 1);
        h(i, k) = g.c * x + std::conj(g.s) * y;
        h(i, k + 1) = -g.s * x + g.c * y;
      }
    }
    for (std::size_t i = l; i <= hi; ++i) h(i, i) += mu;
  }

  result.values = std::move(eig);
  result.iterations = total;
  result.residual_tol = kDeflate * hnorm;
  return result;
}

std::vector<cplx> IncrementalBasis::residual(std::span<const cplx> x) const {
  if (x.size() != dim_) throw ValidationError("vector dimension does not match the basis");
  std::vector<cplx> r(x.begin(), x.end());
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis_) {
      const cplx c = dot(q, r);
      for (std::size_t i = 0; i < dim_; ++i) r[i] -= c * q[i];
    }
  }
  return r;
}

double IncrementalBasis::distance(std::span<const cplx> x) const {
  return std::min(norm2(residual(x)), norm2(x));
}

double IncrementalBasis::add(std::span<const cplx> x) {
  std::vector<cplx> r = residual(x);
  const double nx = norm2(x);
  const double d = norm2(r);
  if (nx > 0.0 && d > 1e-12 * nx) {
    for (auto& z : r) z /= d;
    basis_.push_back(std::move(r));
  }
  return std::min(d, nx);
}

double dist_to_subspace(std::span<const cplx> x, std::span<const std::vector<cplx>> span) {
  IncrementalBasis basis(x.size());
  for (const auto& s : span) basis.add(s);
  return basis.distance(x);
}

double log_abs_det(const ComplexMatrix& a_in) {
  if (!a_in.is_square()) throw ValidationError("log_abs_det: matrix must be square");
  check_finite(a_in, "log_abs_det");
  ComplexMatrix a = a_in;
  const std::size_t n = a.rows();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = std::abs(a(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (best < 1e-300) return -std::numeric_limits<double>::infinity();
    if (piv != k) {
      auto rk = a.row(k);
      auto rp = a.row(piv);
      std::swap_ranges(rk.begin(), rk.end(), rp.begin());
    }
    sum += std::log(best);
    const cplx pivot = a(k, k);
    const auto rk = a.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      auto ri = a.row(i);
      const cplx f = ri[k] / pivot;
      if (f == cplx{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= f * rk[j];
    }
  }
  return sum;
}

SecondMomentIdentity negative_second_moment_check(const ComplexMatrix& a) {
  if (!a.is_square() || a.rows() == 0)
    throw ValidationError("negative_second_moment_check: matrix must be square and non-empty");
  const auto s = singular_values(a).real_values();
  const std::size_t n = s.size();
  if (!(s.back() > 1e-10 * s.front())) {
    throw NearSingularError("matrix is numerically singular (s_n = " + std::to_string(s.back()) +
                                ", s_1 = " + std::to_string(s.front()) + ")",
                            s.back(), s.front());
  }
  SecondMomentIdentity out;
  for (double x : s) out.lhs += 1.0 / (x * x);

  std::vector<std::vector<cplx>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i].assign(a.row(i).begin(), a.row(i).end());
  std::vector<std::vector<cplx>> others;
  others.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    others.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) others.push_back(rows[i]);
    const double d = dist_to_subspace(rows[j], others);
    out.rhs += 1.0 / (d * d);
  }
  out.rel_err = std::abs(out.lhs - out.rhs) / out.lhs;
  return out;
}

Norms operator_and_hs_norms(const ComplexMatrix& a) {
  Norms out;
  out.s1 = largest_singular_value(a);
  out.hs = norm2(a.entries());
  return out;
}

}  // namespace rmtk
