#include "rmtk/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rmtk/errors.hpp"
#include "rmtk/linalg.hpp"
#include "rmtk/parallel.hpp"

namespace rmtk {
namespace {

void check_params(const SphereParams& p, std::size_t n) {
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (!(p.rho > 0.0 && p.rho < 1.0)) throw ValidationError("rho must lie in (0, 1)");
  if (sparse_budget(n, p.delta) < 1) throw ValidationError("delta * n must be at least 1");
}

void check_unit(std::span<const cplx> u) {
  if (u.empty()) throw ValidationError("empty vector");
  if (std::abs(norm2(u) - 1.0) > 1e-10) throw ValidationError("vector must have unit norm (within 1e-10)");
}

// Indices sorted by modulus, largest first; equal moduli keep index order.
std::vector<std::size_t> by_modulus_desc(std::span<const cplx> u) {
  std::vector<std::size_t> idx(u.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::norm(u[a]) > std::norm(u[b]); });
  return idx;
}

}  // namespace

std::size_t sparse_budget(std::size_t n, double delta) {
  return static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) + 1e-9));
}

double dist_to_sparse(std::span<const cplx> u, double delta) {
  check_unit(u);
  if (!(delta >= 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in [0, 1]");
  const std::size_t k = std::min(sparse_budget(u.size(), delta), u.size());
  const auto idx = by_modulus_desc(u);
  double s = 0.0;
  for (std::size_t i = k; i < idx.size(); ++i) s += std::norm(u[idx[i]]);
  return std::sqrt(s);
}

Classification classify(std::span<const cplx> u, const SphereParams& params) {
  check_params(params, u.size());
  Classification c;
  c.dist_to_sparse = dist_to_sparse(u, params.delta);
  const auto support = static_cast<std::size_t>(std::count_if(u.begin(), u.end(), [](cplx z) { return z != cplx{}; }));
  if (support <= sparse_budget(u.size(), params.delta))
    c.kind = VectorKind::Sparse;
  else if (c.dist_to_sparse <= params.rho)
    c.kind = VectorKind::Compressible;
  else
    c.kind = VectorKind::Incompressible;
  return c;
}

std::vector<cplx> random_unit_vector(std::size_t n, Rng& rng) {
  std::vector<cplx> v(n);
  double nv = 0.0;
  while (nv == 0.0) {
    for (auto& z : v) z = draw(ComplexGaussian{1.0}, rng);
    nv = norm2(v);
  }
  for (auto& z : v) z /= nv;
  return v;
}

std::vector<cplx> sample_compressible(std::size_t n, const SphereParams& params, Rng& rng) {
  check_params(params, n);
  const std::size_t k = sparse_budget(n, params.delta);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.index(n - i)]);

  std::vector<cplx> y(k);
  for (auto& z : y) z = draw(ComplexGaussian{1.0}, rng);
  std::vector<cplx> w(n - k);
  for (auto& z : w) z = draw(ComplexGaussian{1.0}, rng);
  const double ny = norm2(y);
  const double nw = norm2(w);
  // ||w|| = eta with eta / sqrt(1 + eta^2) <= rho.
  const double eta_max = params.rho / std::sqrt(1.0 - params.rho * params.rho) * (1.0 - 1e-12);
  const double eta = rng.uniform() * eta_max;

  std::vector<cplx> x(n);
  for (std::size_t i = 0; i < k; ++i) x[perm[i]] = ny > 0.0 ? y[i] / ny : cplx(i == 0 ? 1.0 : 0.0);
  if (nw > 0.0)
    for (std::size_t i = k; i < n; ++i) x[perm[i]] = w[i - k] * (eta / nw);
  const double nx = norm2(x);
  for (auto& z : x) z /= nx;
  return x;
}

SingleVectorReport single_vector_invertibility(const EnsembleSpec& ens, std::span<const cplx> v,
                                               const std::vector<double>& c_grid, std::size_t trials,
                                               std::uint64_t base_seed, std::size_t workers) {
  validate(ens);
  check_unit(v);
  if (v.size() != ens.n) throw ValidationError("vector dimension does not match the ensemble");
  if (trials == 0) throw ValidationError("single_vector_invertibility needs at least one trial");
  if (c_grid.empty()) throw ValidationError("empty c grid");
  for (double c : c_grid)
    if (!(c > 0.0 && c < 1.0)) throw ValidationError("c values must lie in (0, 1)");

  std::vector<double> norms(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const ComplexMatrix a = sample_matrix(ens, SeedSpec{base_seed, t});
    norms[t] = norm2(a * v);
  });

  const double n = static_cast<double>(ens.n);
  SingleVectorReport rep;
  rep.trials = trials;
  std::vector<double> grid = c_grid;
  std::sort(grid.begin(), grid.end());
  for (double c : grid) {
    const double thr = c * std::sqrt(n);
    const auto hits = static_cast<std::size_t>(std::count_if(norms.begin(), norms.end(), [&](double x) { return x <= thr; }));
    ProbabilityRow row;
    row.c = c;
    row.prob = proportion_estimate(hits, trials);
    row.reference = std::pow(1.0 - c, n);
    row.qualifies = row.prob.value <= row.reference + 3.0 * row.prob.std_err;
    if (row.qualifies) {
      rep.found = true;
      rep.best_c = c;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

double compressible_min_ratio(const ComplexMatrix& a, const SphereParams& params, std::size_t vector_samples,
                              const SeedSpec& seed, double* max_dist) {
  if (!a.is_square()) throw ValidationError("matrix must be square");
  const std::size_t n = a.rows();
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  double worst_dist = 0.0;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  for (std::size_t s = 0; s < vector_samples; ++s) {
    const std::vector<cplx> x = sample_compressible(n, params, rng);
    const double d = dist_to_sparse(x, params.delta);
    if (d > params.rho) throw NumericalError("compressible sampler produced a vector outside Comp(delta, rho)");
    worst_dist = std::max(worst_dist, d);
    best = std::min(best, norm2(a * x) / sqrt_n);
  }
  if (max_dist) *max_dist = worst_dist;
  return best;
}

CompressibleReport compressible_inf_probe(const EnsembleSpec& ens, const SphereParams& params,
                                          std::size_t vector_samples, std::size_t trials,
                                          const std::vector<double>& thresholds, std::uint64_t base_seed,
                                          std::size_t workers) {
  validate(ens);
  check_params(params, ens.n);
  if (vector_samples < 1000) throw ValidationError("compressible probe needs at least 1000 vector samples");
  if (trials == 0) throw ValidationError("compressible probe needs at least one trial");

  CompressibleReport rep;
  rep.vector_samples = vector_samples;
  rep.thresholds = thresholds;
  rep.min_ratio.resize(trials);
  std::vector<double> dists(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const SeedSpec s{base_seed, t};
    const ComplexMatrix a = sample_matrix(ens, s);
    rep.min_ratio[t] = compressible_min_ratio(a, params, vector_samples, s.child(1), &dists[t]);
  });
  for (double d : dists) rep.max_sampled_dist = std::max(rep.max_sampled_dist, d);
  for (double thr : thresholds) {
    const auto below =
        std::count_if(rep.min_ratio.begin(), rep.min_ratio.end(), [&](double x) { return x < thr; });
    rep.fraction_below.push_back(static_cast<double>(below) / static_cast<double>(trials));
  }
  return rep;
}

double distance_rhs_for_matrix(const ComplexMatrix& a, const SphereParams& params, double eps) {
  if (!a.is_square()) throw ValidationError("matrix must be square");
  const std::size_t n = a.rows();
  check_params(params, n);
  std::vector<std::vector<cplx>> cols(n);
  for (std::size_t j = 0; j < n; ++j) cols[j] = a.column(j);

  std::vector<double> norms(n), dists(n);
  std::vector<std::vector<cplx>> others;
  others.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    norms[j] = norm2(cols[j]);
    others.clear();
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) others.push_back(cols[k]);
    dists[j] = dist_to_subspace(cols[j], others);
  }
  // Exclude the largest-norm columns; among equal norms, the closer column goes first
  // so that the count does not depend on column order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (norms[x] != norms[y]) return norms[x] > norms[y];
    return dists[x] < dists[y];
  });
  const auto excluded = static_cast<std::size_t>(std::floor(params.delta * static_cast<double>(n) / 2.0 + 1e-9));
  std::size_t count = 0;
  for (std::size_t k = excluded; k < n; ++k) count += dists[order[k]] <= eps ? 1 : 0;
  return 4.0 / (params.delta * static_cast<double>(n)) * static_cast<double>(count);
}

DistanceProbeReport invertibility_via_distance_probe(const EnsembleSpec& ens, const SphereParams& params, double eps,
                                                     std::size_t trials, std::uint64_t base_seed,
                                                     std::size_t workers) {
  validate(ens);
  check_params(params, ens.n);
  if (params.delta * static_cast<double>(ens.n) < 4.0 - 1e-9) throw ValidationError("requires n >= 4 / delta");
  if (!(eps >= 0.0)) throw ValidationError("eps must be non-negative");
  if (trials == 0) throw ValidationError("distance probe needs at least one trial");

  const double thr = eps * params.rho / std::sqrt(static_cast<double>(ens.n));
  std::vector<char> hit(trials);
  std::vector<double> rhs(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const ComplexMatrix a = sample_matrix(ens, SeedSpec{base_seed, t});
    hit[t] = smallest_singular_value(a) <= thr ? 1 : 0;
    rhs[t] = distance_rhs_for_matrix(a, params, eps);
  });
  DistanceProbeReport rep;
  rep.trials = trials;
  rep.lhs = proportion_estimate(static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1)), trials);
  rep.rhs = mean_estimate(rhs);
  rep.margin = (rep.rhs.value + 3.0 * rep.rhs.std_err) - (rep.lhs.value - 3.0 * rep.lhs.std_err);
  rep.flag = rep.margin < 0.0;
  return rep;
}

CrlcdScanReport crlcd_incompressible_scan(const EnsembleSpec& ens, const SphereParams& params,
                                          const CrlcdQuery& query_template, std::size_t vector_samples,
                                          const std::vector<std::vector<cplx>>& candidates, const SeedSpec& seed,
                                          std::size_t workers) {
  validate(ens);
  check_params(params, ens.n);
  const std::size_t n = ens.n;

  CoordinateLaws laws(n);
  CrlcdScanReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = ens.sigma(i, 0);
    laws[i] = scaled(ens.law(i, 0), s);
    const cplx mu = ens.shift(i, 0);
    const cplx m1 = mean(ens.law(i, 0));
    rep.column_second_moment +=
        std::norm(mu) + 2.0 * (std::conj(mu) * s * m1).real() + s * s * second_moment(ens.law(i, 0));
  }

  std::vector<std::vector<cplx>> vecs = candidates;
  if (vecs.empty()) {
    Rng rng(seed.child(0));
    for (std::size_t k = 0; k < vector_samples; ++k) vecs.push_back(random_unit_vector(n, rng));
  }

  double best = std::numeric_limits<double>::infinity();
  for (auto& v : vecs) {
    if (v.size() != n) throw ValidationError("candidate vector dimension does not match the ensemble");
    CrlcdScanEntry e;
    e.classification = classify(v, params);
    e.v = std::move(v);
    if (!e.classification.compressible()) {
      CrlcdQuery q = query_template;
      q.v = e.v;
      e.crlcd = crlcd(q, laws, seed.child(1), workers);
      e.scanned = true;
      ++rep.scanned;
      if (e.crlcd.capped) ++rep.all_capped;
      best = std::min(best, e.crlcd.value);
    }
    rep.entries.push_back(std::move(e));
  }
  if (rep.scanned > 0) {
    rep.min_crlcd = best;
    rep.h_fit = best * std::sqrt(rep.column_second_moment) / static_cast<double>(n);
  }
  return rep;
}

}  // namespace rmtk
