#include <doctest.h>

#include <cmath>

#include "rmtk/errors.hpp"
#include "rmtk/linalg.hpp"
#include "rmtk/sphere.hpp"

using namespace rmtk;

namespace {

// min over supports S with |S| = k of the norm of u outside S.
double brute_dist_to_sparse(const std::vector<cplx>& u, std::size_t k) {
  const std::size_t n = u.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != k) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (!(mask >> j & 1)) s += std::norm(u[j]);
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

std::vector<cplx> uniform_vector(std::size_t n) { return std::vector<cplx>(n, 1.0 / std::sqrt(static_cast<double>(n))); }

EnsembleSpec deterministic(std::size_t n, const ComplexMatrix& shift) {
  EnsembleSpec ens = iid_ensemble(n, ComplexGaussian{1.0});
  ens.shift = shift;
  std::fill(ens.scale.begin(), ens.scale.end(), 0.0);
  return ens;
}

}  // namespace

TEST_SUITE("sphere") {
  TEST_CASE("distance to sparse vectors") {
    std::vector<cplx> e1(10);
    e1[0] = 1.0;
    CHECK(dist_to_sparse(e1, 0.1) == 0.0);
    CHECK(dist_to_sparse(uniform_vector(8), 0.5) == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(dist_to_sparse(std::vector<cplx>{1.0, 1.0}, 0.5), ValidationError);

    Rng rng(SeedSpec{1, 0});
    for (int rep = 0; rep < 20; ++rep) {
      const auto u = random_unit_vector(8, rng);
      CHECK(dist_to_sparse(u, 0.25) == doctest::Approx(brute_dist_to_sparse(u, 2)).epsilon(1e-12));
    }
  }

  TEST_CASE("distance to sparse: range, monotonicity, zero set") {
    Rng rng(SeedSpec{2, 0});
    for (int rep = 0; rep < 20; ++rep) {
      auto u = random_unit_vector(12, rng);
      double prev = 1.0 + 1e-15;
      for (double delta : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
        const double d = dist_to_sparse(u, delta);
        CHECK(d >= 0.0);
        CHECK(d <= prev);
        CHECK((d == 0.0) == (sparse_budget(12, delta) >= 12));
        prev = d;
      }
      // Zero out all but three coordinates: distance vanishes exactly at budget >= 3.
      for (std::size_t j = 3; j < 12; ++j) u[j] = 0.0;
      const double nu = norm2(u);
      for (auto& z : u) z /= nu;
      CHECK(dist_to_sparse(u, 0.25) == 0.0);
      CHECK(dist_to_sparse(u, 0.2) > 0.0);
    }
    CHECK(sparse_budget(30, 0.1) == 3);
  }

  TEST_CASE("classification") {
    std::vector<cplx> e1(20);
    e1[0] = 1.0;
    const Classification c = classify(e1, SphereParams{0.1, 0.1});
    CHECK(c.kind == VectorKind::Sparse);
    CHECK(c.compressible());

    const Classification u = classify(uniform_vector(100), SphereParams{0.1, 0.1});
    CHECK(u.kind == VectorKind::Incompressible);
    CHECK(u.dist_to_sparse == doctest::Approx(std::sqrt(0.9)));

    // dist = 0.6 exactly: (0.8, 0.6) with one-sparse budget.
    const std::vector<cplx> b{0.8, 0.6};
    const double d = dist_to_sparse(b, 0.5);
    const Classification cb = classify(b, SphereParams{0.5, d});
    CHECK(cb.kind == VectorKind::Compressible);
    CHECK(classify(b, SphereParams{0.5, std::nextafter(d, 0.0)}).kind == VectorKind::Incompressible);
  }

  TEST_CASE("classification partitions the sphere") {
    Rng rng(SeedSpec{3, 0});
    const SphereParams p{0.2, 0.3};
    for (int rep = 0; rep < 200; ++rep) {
      const auto u = rep % 2 ? random_unit_vector(10, rng) : sample_compressible(10, p, rng);
      const Classification c = classify(u, p);
      CHECK(c.compressible() == (c.dist_to_sparse <= p.rho));
      if (c.kind == VectorKind::Sparse) CHECK(c.dist_to_sparse == 0.0);
    }
  }

  TEST_CASE("compressible sampler stays within rho") {
    Rng rng(SeedSpec{4, 0});
    for (const SphereParams p : {SphereParams{0.1, 0.1}, SphereParams{0.25, 0.5}, SphereParams{0.05, 0.01}}) {
      for (int rep = 0; rep < 300; ++rep) {
        const auto u = sample_compressible(40, p, rng);
        CHECK(norm2(u) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dist_to_sparse(u, p.delta) <= p.rho);
      }
    }
  }

  TEST_CASE("single-vector invertibility") {
    SUBCASE("zero ensemble: no c qualifies") {
      const SingleVectorReport r =
          single_vector_invertibility(deterministic(8, ComplexMatrix(8, 8)), uniform_vector(8), {0.05, 0.1, 0.5}, 50, 1);
      CHECK_FALSE(r.found);
      for (const auto& row : r.rows) CHECK(row.prob.value == 1.0);
    }
    SUBCASE("Ginibre, e1") {
      std::vector<cplx> e1(32);
      e1[0] = 1.0;
      const SingleVectorReport r = single_vector_invertibility(iid_ensemble(32, ComplexGaussian{1.0}), e1, {0.1}, 2000, 2);
      CHECK(r.rows[0].prob.value < 1e-3);
    }
    SUBCASE("four-point, uniform vector") {
      const SingleVectorReport r =
          single_vector_invertibility(iid_ensemble(32, FourPointUniform{}), uniform_vector(32), {0.05, 0.1, 0.2}, 500, 3);
      CHECK(r.found);
      CHECK(r.best_c >= 0.05);
    }
  }

  TEST_CASE("compressible infimum probe") {
    const std::size_t n = 16;
    const SphereParams p{0.1, 0.1};
    const CompressibleReport zero = compressible_inf_probe(deterministic(n, ComplexMatrix(n, n)), p, 1000, 3, {0.1}, 1);
    for (double m : zero.min_ratio) CHECK(m == 0.0);

    ComplexMatrix s = ComplexMatrix::identity(n);
    s *= std::sqrt(static_cast<double>(n));
    const CompressibleReport iso = compressible_inf_probe(deterministic(n, s), p, 1000, 3, {0.1}, 1);
    for (double m : iso.min_ratio) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(iso.max_sampled_dist <= p.rho);

    CHECK_THROWS_AS(compressible_inf_probe(deterministic(n, s), p, 999, 3, {0.1}, 1), ValidationError);
  }

  TEST_CASE("compressible probe on Ginibre n = 32") {
    const CompressibleReport r =
        compressible_inf_probe(iid_ensemble(32, ComplexGaussian{1.0}), SphereParams{0.1, 0.1}, 1000, 200, {0.2}, 5);
    REQUIRE(r.fraction_below.size() == 1);
    CHECK(r.fraction_below[0] <= 0.01);
  }

  TEST_CASE("invertibility via distance") {
    const SphereParams p{0.2, 0.2};
    const EnsembleSpec g = iid_ensemble(40, ComplexGaussian{1.0});
    SUBCASE("eps = 0") {
      const DistanceProbeReport r = invertibility_via_distance_probe(g, p, 0.0, 20, 1);
      CHECK(r.lhs.value == 0.0);
      CHECK(r.rhs.value == 0.0);
      CHECK_FALSE(r.flag);
    }
    SUBCASE("eps = 0.1") {
      const DistanceProbeReport r = invertibility_via_distance_probe(g, p, 0.1, 1000, 2);
      CHECK_FALSE(r.flag);
      CHECK(r.margin > 0.0);
    }
    SUBCASE("eps = 10") {
      const DistanceProbeReport r = invertibility_via_distance_probe(g, p, 10.0, 20, 3);
      CHECK(r.lhs.value <= 1.0);
      CHECK(r.rhs.value >= 1.0);
      CHECK_FALSE(r.flag);
    }
    SUBCASE("n below 4 / delta") {
      CHECK_THROWS_AS(invertibility_via_distance_probe(iid_ensemble(10, ComplexGaussian{1.0}), p, 0.1, 5, 1), ValidationError);
    }
  }

  TEST_CASE("distance RHS is invariant under column permutation") {
    const std::size_t n = 24;
    const SphereParams p{0.25, 0.2};
    for (std::uint64_t t = 0; t < 5; ++t) {
      const ComplexMatrix a = sample_matrix(iid_ensemble(n, FourPointUniform{}), SeedSpec{9, t});
      ComplexMatrix b(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = a(i, (j * 7 + 3) % n);
      for (double eps : {0.3, 0.6, 1.0, 2.0}) CHECK(distance_rhs_for_matrix(b, p, eps) == distance_rhs_for_matrix(a, p, eps));
    }
  }

  TEST_CASE("CRLCD scan over incompressible vectors") {
    const SphereParams p{0.1, 0.1};
    CrlcdQuery q;
    q.mc_samples = 2000;
    SUBCASE("four-point columns, uniform vector") {
      const CrlcdScanReport r =
          crlcd_incompressible_scan(iid_ensemble(16, FourPointUniform{}), p, q, 0, {uniform_vector(16)}, SeedSpec{1, 0});
      REQUIRE(r.scanned == 1);
      CHECK(r.min_crlcd > 1.0);
      CHECK(r.h_fit > 0.0);
    }
    SUBCASE("gaussian columns reach the cap when L^2 is below the saturation level") {
      q.L = 1.0;
      const CrlcdScanReport r = crlcd_incompressible_scan(iid_ensemble(16, ComplexGaussian{1.0}), p, q, 3, {}, SeedSpec{2, 0});
      CHECK(r.scanned == 3);
      CHECK(r.all_capped == 3);
    }
    SUBCASE("e1 is compressible and skipped") {
      std::vector<cplx> e1(16);
      e1[0] = 1.0;
      const CrlcdScanReport r = crlcd_incompressible_scan(iid_ensemble(16, FourPointUniform{}), p, q, 0, {e1}, SeedSpec{3, 0});
      REQUIRE(r.entries.size() == 1);
      CHECK_FALSE(r.entries[0].scanned);
      CHECK(r.entries[0].classification.compressible());
      CHECK(r.scanned == 0);
    }
  }
}
